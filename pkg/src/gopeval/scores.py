"""Per-segment scoring functions.

Three classic baselines (averaged log probability, log-prob margin against
the best phone, prior-ratio) and four uncertainty scores (entropy, margin,
max-logit, logit-margin). Probability scores read SegmentStats.mean_prob,
logit scores read SegmentStats.mean_logit; the normalization already baked
into those stats is what makes the full method grid a single composition
rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    FrameLogitMatrix,
    GopMethod,
    PhoneInventory,
    PhonePrior,
    PhoneSegment,
    Scoring,
)
from .errors import ConfigError, DataError
from .posterior import SegmentStats, segment_stats

# Stand-in for log(0) when a mean probability underflows to exactly zero.
# Rank statistics downstream are unaffected by the specific floor value;
# it merely keeps scores finite.
LOG_FLOOR = -745.0


@dataclass(frozen=True)
class SegmentScore:
    """Score of one phone occurrence under one method."""

    utterance_id: str
    phone: int
    score: float
    method: GopMethod

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise DataError(
                f"utterance {self.utterance_id!r}: non-finite segment score"
            )


def _log_or_floor(p: float, floor: float) -> float:
    return math.log(p) if p > 0.0 else floor


def score_gmm(stats: SegmentStats, phone: int) -> float:
    """Frame-averaged log probability of the canonical phone. Always <= 0."""
    return float(stats.mean_logprob[phone])


def score_nn(stats: SegmentStats, phone: int, log_floor: float = LOG_FLOOR) -> float:
    """log mean-prob of the phone minus the best log mean-prob over all
    phones (the phone itself included). <= 0, and 0 iff the phone attains
    the maximum."""
    probs = stats.mean_prob
    lp = _log_or_floor(float(probs[phone]), log_floor)
    # the max is >= 1/|Q| > 0, so its log never needs the floor
    return lp - math.log(float(probs.max()))


def score_dnn(stats: SegmentStats, phone: int, prior: PhonePrior) -> float:
    """Mean probability divided by the phone prior.

    Expects stats computed with normalization 'none'; the prior enters here
    as a ratio, not as a logit shift.
    """
    return float(stats.mean_prob[phone] / prior.probs[phone])


def score_entropy(stats: SegmentStats) -> float:
    """Shannon entropy of the mean distribution, with 0*log 0 = 0.

    Independent of the canonical phone; in [0, log |Q|].
    """
    p = stats.mean_prob
    nz = p[p > 0.0]
    return float(-(nz * np.log(nz)).sum())


def score_entropy_literal(
    stats: SegmentStats, phone: int, log_floor: float = LOG_FLOOR
) -> float:
    """Degenerate entropy variant that collapses to -log mean-prob of the
    canonical phone. Kept for reproduction studies only; not part of the
    method grid."""
    return -_log_or_floor(float(stats.mean_prob[phone]), log_floor)


def score_margin(stats: SegmentStats, phone: int) -> float:
    """Mean probability of the phone minus the best competing phone's.

    In [-1, 1]; positive iff the phone strictly dominates all others.
    """
    probs = stats.mean_prob
    if len(probs) < 2:
        raise DataError("margin needs at least 2 phones")
    return float(probs[phone] - np.delete(probs, phone).max())


def score_maxlogit(stats: SegmentStats, phone: int) -> float:
    """Frame-averaged (normalized) logit of the phone. Unbounded."""
    return float(stats.mean_logit[phone])


def score_logitmargin(stats: SegmentStats, phone: int) -> float:
    """Mean logit of the phone minus the best competing phone's mean logit."""
    logits = stats.mean_logit
    if len(logits) < 2:
        raise DataError("logit margin needs at least 2 phones")
    return float(logits[phone] - np.delete(logits, phone).max())


def score_from_stats(
    stats: SegmentStats,
    phone: int,
    method: GopMethod,
    prior: PhonePrior | None = None,
) -> float:
    """Dispatch to the method's scoring function over precomputed stats."""
    scoring = method.scoring
    if scoring is Scoring.GMM:
        return score_gmm(stats, phone)
    if scoring is Scoring.NN:
        return score_nn(stats, phone)
    if scoring is Scoring.DNN:
        if prior is None:
            raise ConfigError("dnn scoring requires a phone prior")
        return score_dnn(stats, phone, prior)
    if scoring is Scoring.ENTROPY:
        return score_entropy(stats)
    if scoring is Scoring.MARGIN:
        return score_margin(stats, phone)
    if scoring is Scoring.MAXLOGIT:
        return score_maxlogit(stats, phone)
    if scoring is Scoring.LOGITMARGIN:
        return score_logitmargin(stats, phone)
    raise ConfigError(f"unknown scoring function {scoring!r}")


def score_segment(
    matrix: FrameLogitMatrix,
    segment: PhoneSegment,
    method: GopMethod,
    inventory: PhoneInventory,
    prior: PhonePrior | None = None,
) -> SegmentScore | None:
    """Score one aligned segment; returns None for skip-labeled segments.

    Validation failures are re-raised with utterance and segment context.
    """
    matrix.check_width(inventory)
    if segment.phone >= len(inventory):
        raise DataError(
            f"utterance {matrix.utterance_id!r}: phone index {segment.phone} "
            f"out of range for inventory of {len(inventory)}"
        )
    if inventory.is_skip_index(segment.phone):
        return None
    if method.needs_prior and prior is None:
        raise ConfigError(
            f"method {method.label} requires a phone prior"
        )
    try:
        stats = segment_stats(matrix, segment, method, prior)
        value = score_from_stats(stats, segment.phone, method, prior)
    except DataError as exc:
        label = inventory.label_of(segment.phone)
        raise DataError(
            f"utterance {matrix.utterance_id!r}, segment {label} "
            f"[{segment.start_frame}, {segment.end_frame}): {exc}"
        ) from exc
    return SegmentScore(
        utterance_id=matrix.utterance_id,
        phone=segment.phone,
        score=value,
        method=method,
    )
