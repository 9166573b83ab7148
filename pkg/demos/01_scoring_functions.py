"""Tour of the seven per-segment scoring functions.

One tiny utterance, two frames, three phones. The canonical phone is 'a'
(column 0). Frame 1 favors 'a', frame 2 favors 'c', so the segment is
ambiguous on average -- a nice case to compare the scores on.
"""

import numpy as np

from gopeval import (
    FrameLogitMatrix,
    GopMethod,
    PhoneInventory,
    PhonePrior,
    PhoneSegment,
    score_dnn,
    score_entropy,
    score_gmm,
    score_logitmargin,
    score_margin,
    score_maxlogit,
    score_nn,
    score_segment,
    segment_stats,
)

inventory = PhoneInventory.from_labels(["a", "b", "c", "sil"])
matrix = FrameLogitMatrix(
    "demo-utt",
    np.array(
        [
            [2.0, 1.0, 0.0, -3.0],  # frame 1: 'a' wins
            [0.0, 1.0, 2.0, -3.0],  # frame 2: 'c' wins
        ]
    ),
)
segment = PhoneSegment(phone=0, start_frame=0, end_frame=2)
prior = PhonePrior(np.array([0.4, 0.2, 0.2, 0.2]))

method = GopMethod.parse("none:maxlogit")
stats = segment_stats(matrix, segment, method)

print("frame-averaged posterior:", np.round(stats.mean_prob, 5))
print("frame-averaged logits:   ", np.round(stats.mean_logit, 5))
print()
print("averaged log probability (gmm):", round(score_gmm(stats, 0), 5))
print("log-prob vs best (nn):         ", round(score_nn(stats, 0), 5))
print("prior ratio (dnn):             ", round(score_dnn(stats, 0, prior), 5))
print("entropy (phone-free):          ", round(score_entropy(stats), 5))
print("probability margin:            ", round(score_margin(stats, 0), 5))
print("mean logit (maxlogit):         ", round(score_maxlogit(stats, 0), 5))
print("logit margin:                  ", round(score_logitmargin(stats, 0), 5))
print()

# The dispatcher skips silence-like segments entirely.
sil_segment = PhoneSegment(phone=3, start_frame=0, end_frame=2)
result = score_segment(matrix, sil_segment, method, inventory)
print("scoring a 'sil' segment returns:", result)

# Entropy never looks at the canonical phone: same frames, any phone,
# same value.
entropy_method = GopMethod.parse("none:entropy")
values = [
    score_segment(matrix, PhoneSegment(p, 0, 2), entropy_method, inventory).score
    for p in range(3)
]
print("entropy for canonical a/b/c:    ", [round(v, 6) for v in values])
