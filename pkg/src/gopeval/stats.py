"""Utterance aggregation and tie-corrected rank correlation.

kendall_tau_b has two interchangeable pair-counting backends: a direct
O(n^2) enumeration (the reference, and the oracle every test falls back
on) and a merge-sort O(n log n) path. Both produce the same integer
counts, so the resulting tau values are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import GopMethod, PhoneInventory, SeverityLabel
from .errors import (
    ConfigError,
    DataError,
    MissingLabelError,
    UndefinedCorrelationError,
    UnscorableUtteranceError,
)
from .scores import SegmentScore


@dataclass(frozen=True)
class UtteranceScore:
    """Mean of one utterance's segment scores under one method."""

    utterance_id: str
    score: float
    n_segments: int

    def __post_init__(self):
        if self.n_segments < 1:
            raise DataError("utterance score needs at least one segment")
        if not math.isfinite(self.score):
            raise DataError(
                f"utterance {self.utterance_id!r}: non-finite mean score"
            )


@dataclass(frozen=True)
class CorrelationResult:
    """Kendall tau-b plus the sizes behind it."""

    tau: float
    n_pairs: int
    n_items: int

    def __post_init__(self):
        if not (-1.0 <= self.tau <= 1.0):
            raise DataError(f"tau out of range: {self.tau!r}")
        if self.n_items < 2:
            raise DataError("correlation needs at least 2 items")


@dataclass(frozen=True)
class MethodEvaluation:
    """A correlation result annotated with the method that produced it."""

    method: GopMethod
    result: CorrelationResult


@dataclass(frozen=True)
class PhonemeCorrelation:
    phone: int
    tau: float
    n_segments: int


@dataclass(frozen=True)
class SkippedPhone:
    """Phone excluded from the per-phoneme analysis, with the reason."""

    phone: int
    n_segments: int
    reason: str


def aggregate_utterance(scores: Sequence[SegmentScore]) -> UtteranceScore:
    """Arithmetic mean of one utterance's segment scores, in segment order."""
    if not scores:
        raise UnscorableUtteranceError("no scorable segments to aggregate")
    utt = scores[0].utterance_id
    method = scores[0].method
    total = 0.0
    for s in scores:
        if s.utterance_id != utt:
            raise DataError(
                f"mixed utterances in aggregation: {utt!r} vs "
                f"{s.utterance_id!r}"
            )
        if s.method != method:
            raise DataError(f"mixed methods in aggregation for {utt!r}")
        total += s.score
    return UtteranceScore(
        utterance_id=utt, score=total / len(scores), n_segments=len(scores)
    )


def _pair_counts_brute(x: np.ndarray, y: np.ndarray) -> tuple[int, int, int, int]:
    """Direct enumeration of all n(n-1)/2 pairs.

    Returns (concordant, discordant, pairs tied in x, pairs tied in y);
    pairs tied in both count toward both tie totals and toward neither C
    nor D.
    """
    n = len(x)
    iu = np.triu_indices(n, k=1)
    sx = np.sign(x[iu[0]] - x[iu[1]])
    sy = np.sign(y[iu[0]] - y[iu[1]])
    prod = sx * sy
    concordant = int(np.count_nonzero(prod > 0))
    discordant = int(np.count_nonzero(prod < 0))
    ties_x = int(np.count_nonzero(sx == 0))
    ties_y = int(np.count_nonzero(sy == 0))
    return concordant, discordant, ties_x, ties_y


def _merge_count_inversions(values: list) -> int:
    """Number of pairs i < j with values[i] > values[j] (strict)."""
    n = len(values)
    if n < 2:
        return 0
    work = list(values)
    buf = [None] * n
    inversions = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if work[j] < work[i]:
                    inversions += mid - i
                    buf[k] = work[j]
                    j += 1
                else:
                    buf[k] = work[i]
                    i += 1
                k += 1
            buf[k:hi] = work[i:mid] if i < mid else work[j:hi]
            work[lo:hi] = buf[lo:hi]
        width *= 2
    return inversions


def _tied_pairs(sorted_seq: Sequence) -> int:
    total = 0
    run = 1
    for prev, cur in zip(sorted_seq, sorted_seq[1:]):
        if cur == prev:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    total += run * (run - 1) // 2
    return total


def _pair_counts_fast(x: np.ndarray, y: np.ndarray) -> tuple[int, int, int, int]:
    """Merge-sort pair counting; same integer counts as the brute path."""
    n = len(x)
    order = sorted(range(n), key=lambda i: (x[i], y[i]))
    xs = [float(x[i]) for i in order]
    ys = [float(y[i]) for i in order]
    n0 = n * (n - 1) // 2
    ties_x = _tied_pairs(xs)
    ties_xy = _tied_pairs(list(zip(xs, ys)))
    ties_y = _tied_pairs(sorted(ys))
    # After sorting by (x, y), a strict y-inversion can only involve a pair
    # with strictly increasing x, i.e. exactly the discordant pairs.
    discordant = _merge_count_inversions(ys)
    concordant = n0 - ties_x - ties_y + ties_xy - discordant
    return concordant, discordant, ties_x, ties_y


def kendall_tau_b(
    x: Sequence[float],
    y: Sequence[float],
    algorithm: str = "fast",
) -> CorrelationResult:
    """Tie-corrected Kendall rank correlation.

    tau-b = (C - D) / sqrt((n0 - n1)(n0 - n2)) with n0 = n(n-1)/2 and
    n1/n2 the tied-pair counts within x/y. Raises
    UndefinedCorrelationError when either variable is entirely tied.
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.ndim != 1 or ya.ndim != 1 or len(xa) != len(ya):
        raise DataError(
            f"correlation inputs must be equal-length vectors, got "
            f"{xa.shape} and {ya.shape}"
        )
    if len(xa) < 2:
        raise DataError("correlation needs at least 2 items")
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(ya))):
        raise DataError("correlation inputs must be finite")
    if algorithm == "brute":
        c, d, n1, n2 = _pair_counts_brute(xa, ya)
    elif algorithm == "fast":
        c, d, n1, n2 = _pair_counts_fast(xa, ya)
    else:
        raise ConfigError(f"unknown algorithm {algorithm!r}")
    n = len(xa)
    n0 = n * (n - 1) // 2
    if n0 == n1:
        raise UndefinedCorrelationError("all x values tied; tau undefined")
    if n0 == n2:
        raise UndefinedCorrelationError("all y values tied; tau undefined")
    tau = (c - d) / math.sqrt((n0 - n1) * (n0 - n2))
    tau = max(-1.0, min(1.0, tau))
    return CorrelationResult(tau=tau, n_pairs=n0, n_items=n)


def _severity_map(labels) -> Mapping[str, int]:
    if isinstance(labels, Mapping):
        return labels
    return {l.key: l.severity for l in labels}


def evaluate_method(
    utterance_scores: Sequence[UtteranceScore],
    labels: Mapping[str, int] | Sequence[SeverityLabel],
    method: GopMethod,
    algorithm: str = "fast",
) -> MethodEvaluation:
    """Correlate per-utterance mean scores with severity labels.

    `labels` is the utterance-level severity map (speaker labels already
    expanded). Every scored utterance must be covered.
    """
    severity = _severity_map(labels)
    missing = sorted(
        u.utterance_id for u in utterance_scores if u.utterance_id not in severity
    )
    if missing:
        shown = ", ".join(missing[:10])
        more = "" if len(missing) <= 10 else f" (+{len(missing) - 10} more)"
        raise MissingLabelError(
            f"no severity label for utterances: {shown}{more}"
        )
    ordered = sorted(utterance_scores, key=lambda u: u.utterance_id)
    xs = [u.score for u in ordered]
    ys = [float(severity[u.utterance_id]) for u in ordered]
    result = kendall_tau_b(xs, ys, algorithm=algorithm)
    return MethodEvaluation(method=method, result=result)


def phoneme_correlations(
    segment_scores: Sequence[SegmentScore],
    labels: Mapping[str, int] | Sequence[SeverityLabel],
    min_support: int = 10,
    algorithm: str = "fast",
) -> tuple[list[PhonemeCorrelation], list[SkippedPhone]]:
    """Per-phone tau between segment scores and their utterance's severity.

    Each segment pairs its own score with the owning utterance's severity
    (not the utterance mean). Phones with fewer than min_support segments,
    or whose pairs leave tau undefined, land in the skipped sidecar.
    Correlations come back sorted most-negative first.
    """
    severity = _severity_map(labels)
    missing = sorted(
        {s.utterance_id for s in segment_scores if s.utterance_id not in severity}
    )
    if missing:
        shown = ", ".join(missing[:10])
        raise MissingLabelError(f"no severity label for utterances: {shown}")
    by_phone: dict[int, list[SegmentScore]] = {}
    for s in segment_scores:
        by_phone.setdefault(s.phone, []).append(s)
    correlations: list[PhonemeCorrelation] = []
    skipped: list[SkippedPhone] = []
    for phone in sorted(by_phone):
        group = by_phone[phone]
        if len(group) < min_support:
            skipped.append(
                SkippedPhone(phone, len(group), "below-min-support")
            )
            continue
        xs = [s.score for s in group]
        ys = [float(severity[s.utterance_id]) for s in group]
        try:
            result = kendall_tau_b(xs, ys, algorithm=algorithm)
        except UndefinedCorrelationError:
            skipped.append(
                SkippedPhone(phone, len(group), "undefined-correlation")
            )
            continue
        correlations.append(
            PhonemeCorrelation(phone=phone, tau=result.tau, n_segments=len(group))
        )
    correlations.sort(key=lambda c: (c.tau, c.phone))
    return correlations, skipped


def top_k_phonemes(
    correlations: Sequence[PhonemeCorrelation],
    k: int,
    inventory: PhoneInventory,
) -> list[PhonemeCorrelation]:
    """First k phones by most-negative tau; ties break on the phone label.

    Asking for more than exist returns everything.
    """
    if k < 1:
        raise ConfigError(f"top-k needs k >= 1, got {k}")
    ranked = sorted(
        correlations, key=lambda c: (c.tau, inventory.label_of(c.phone))
    )
    return ranked[:k]
