"""What the two logit normalizations do, and what they cannot do.

Temperature scaling divides every logit by T before the softmax. That
changes probability-based scores, but it only rescales the mean-logit
scores -- so any rank statistic over them is unchanged. Prior
normalization subtracts log P(p) per frame; with a uniform prior that is
a constant shift, which the softmax ignores completely.
"""

import numpy as np

from gopeval import (
    FrameLogitMatrix,
    GopMethod,
    PhonePrior,
    PhoneSegment,
    score_entropy,
    score_maxlogit,
    segment_stats,
)

rng = np.random.default_rng(0)
matrix = FrameLogitMatrix("u", rng.normal(size=(4, 5)) * 2)
segment = PhoneSegment(phone=2, start_frame=0, end_frame=4)

print("temperature sweep on one segment:")
print("T      entropy   maxlogit   maxlogit * T")
plain = segment_stats(matrix, segment, GopMethod.parse("none:maxlogit"))
for t in (0.5, 1.0, 2.0, 10.0):
    method = GopMethod.parse("scale:maxlogit", temperature=t)
    stats = segment_stats(matrix, segment, method)
    print(
        f"{t:<6g} {score_entropy(stats):<9.5f} "
        f"{score_maxlogit(stats, 2):<10.5f} "
        f"{score_maxlogit(stats, 2) * t:.5f}"
    )
print(
    "(entropy moves with T; maxlogit is just divided by T, so its"
    " segment ranking cannot move)"
)
print()

uniform = PhonePrior(np.full(5, 0.2))
skewed = PhonePrior(np.array([0.6, 0.1, 0.1, 0.1, 0.1]))
none_stats = segment_stats(matrix, segment, GopMethod.parse("none:entropy"))
for name, prior in (("uniform", uniform), ("skewed", skewed)):
    stats = segment_stats(
        matrix, segment, GopMethod.parse("prior:entropy"), prior
    )
    delta = np.abs(stats.mean_prob - none_stats.mean_prob).max()
    print(f"{name} prior: max |posterior shift| = {delta:.2e}")
print("(a uniform prior shifts all logits equally -> softmax unchanged)")
