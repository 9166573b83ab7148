"""Numerically stable probability machinery.

Everything here is frame-level: logits are normalized per frame (identity,
temperature scaling, or prior subtraction), softmaxed per frame via the
max-subtraction log-sum-exp trick, and only then averaged over a segment's
frames in double precision, in frame order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FrameLogitMatrix, GopMethod, Normalization, PhonePrior, PhoneSegment
from .errors import ConfigError, DataError


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Log of softmax(logits), stable for arbitrarily large entries.

    exp(result) sums to 1 within 1e-12.
    """
    arr = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DataError("log_softmax: non-finite logits")
    m = arr.max()
    lse = m + np.log(np.exp(arr - m).sum())
    return arr - lse


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def normalize_logits(
    logits: np.ndarray,
    method: GopMethod,
    prior: PhonePrior | None = None,
) -> np.ndarray:
    """Apply the method's frame-level normalization to one logit vector.

    none: identity; scale: divide by the temperature; prior: subtract the
    log prior entry-wise. Applied per frame, before any averaging.
    """
    arr = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DataError("normalize_logits: non-finite logits")
    norm = method.normalization
    if norm is Normalization.NONE:
        return arr.copy()
    if norm is Normalization.SCALE:
        # temperature > 0 is enforced at GopMethod construction
        return arr / method.temperature
    if norm is Normalization.PRIOR:
        if prior is None:
            raise ConfigError("prior normalization requires a phone prior")
        if len(prior) != arr.shape[-1]:
            raise DataError(
                f"prior has {len(prior)} entries, logits have {arr.shape[-1]}"
            )
        return arr - prior.log_probs
    raise ConfigError(f"unknown normalization {norm!r}")


@dataclass(frozen=True)
class SegmentStats:
    """Frame-averaged views of one segment under one normalization.

    mean_prob is the frame-mean of per-frame softmax outputs, mean_logit the
    frame-mean of normalized logits, and mean_logprob the frame-mean of
    per-frame log-softmax values (the quantity behind the averaged-log-prob
    baseline score).
    """

    mean_prob: np.ndarray
    mean_logit: np.ndarray
    mean_logprob: np.ndarray
    n_frames: int

    def __post_init__(self):
        if self.n_frames < 1:
            raise DataError("segment stats need at least one frame")
        total = float(self.mean_prob.sum())
        if abs(total - 1.0) > 1e-9:
            raise DataError(
                f"mean probabilities sum to {total!r}, expected 1 within 1e-9"
            )
        for arr in (self.mean_prob, self.mean_logit, self.mean_logprob):
            arr.setflags(write=False)


def segment_stats(
    matrix: FrameLogitMatrix,
    segment: PhoneSegment,
    method: GopMethod,
    prior: PhonePrior | None = None,
) -> SegmentStats:
    """Normalize and average one segment's frames in a single pass.

    Accumulation is float64 and strictly in frame order, so results are
    deterministic and safe to compare bit-for-bit across runs.
    """
    if segment.end_frame > matrix.n_frames:
        raise DataError(
            f"utterance {matrix.utterance_id!r}: segment frames "
            f"[{segment.start_frame}, {segment.end_frame}) exceed matrix "
            f"length {matrix.n_frames}"
        )
    nq = matrix.n_phones
    sum_logit = np.zeros(nq)
    sum_logprob = np.zeros(nq)
    sum_prob = np.zeros(nq)
    for f in range(segment.start_frame, segment.end_frame):
        normed = normalize_logits(matrix.values[f], method, prior)
        logprob = log_softmax(normed)
        sum_logit += normed
        sum_logprob += logprob
        sum_prob += np.exp(logprob)
    n = segment.n_frames
    return SegmentStats(
        mean_prob=sum_prob / n,
        mean_logit=sum_logit / n,
        mean_logprob=sum_logprob / n,
        n_frames=n,
    )
