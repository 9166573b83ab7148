"""Domain types shared by every stage of the pipeline.

The phone inventory is the single contract tying files together: logit
matrix columns, alignment labels and prior entries are all interpreted in
inventory order. All types here are immutable after construction and safe
to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError, UnknownLabelError, UsageError

# Forced-alignment fillers that must not enter utterance means.
DEFAULT_SKIP_LABELS = frozenset({"sil", "sp", "spn", ""})


class Normalization(Enum):
    """Frame-level logit normalization applied before any scoring."""

    NONE = "none"
    SCALE = "scale"
    PRIOR = "prior"


class Scoring(Enum):
    """Per-segment scoring function."""

    GMM = "gmm"
    NN = "nn"
    DNN = "dnn"
    ENTROPY = "entropy"
    MARGIN = "margin"
    MAXLOGIT = "maxlogit"
    LOGITMARGIN = "logitmargin"


# Scores reading the softmax side vs. the raw-logit side of SegmentStats.
PROBABILITY_SCORES = frozenset(
    {Scoring.GMM, Scoring.NN, Scoring.DNN, Scoring.ENTROPY, Scoring.MARGIN}
)
LOGIT_SCORES = frozenset({Scoring.MAXLOGIT, Scoring.LOGITMARGIN})


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PhoneInventory:
    """Ordered phone set; defines the column order of every logit matrix."""

    labels: tuple[str, ...]
    skip_labels: frozenset[str] = frozenset()
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 2:
            raise DataError(f"inventory needs at least 2 phones, got {len(labels)}")
        if any(not isinstance(l, str) or not l for l in labels):
            raise DataError("inventory labels must be non-empty strings")
        if len(set(labels)) != len(labels):
            dupes = sorted({l for l in labels if labels.count(l) > 1})
            raise DataError(f"duplicate inventory labels: {dupes}")
        skip = frozenset(self.skip_labels)
        unknown = skip - set(labels)
        if unknown:
            raise DataError(f"skip labels not in inventory: {sorted(unknown)}")
        object.__setattr__(self, "skip_labels", skip)
        object.__setattr__(self, "_index", {l: i for i, l in enumerate(labels)})

    @classmethod
    def from_labels(
        cls, labels: Iterable[str], skip_labels: Iterable[str] | None = None
    ) -> "PhoneInventory":
        """Build an inventory; with no explicit skip set, silence-style
        labels from DEFAULT_SKIP_LABELS are skipped if present."""
        labels = tuple(labels)
        if skip_labels is None:
            skip = frozenset(l for l in labels if l in DEFAULT_SKIP_LABELS)
        else:
            skip = frozenset(skip_labels)
        return cls(labels=labels, skip_labels=skip)

    def __len__(self) -> int:
        return len(self.labels)

    def index_of(self, label: str, context: str | None = None) -> int:
        """Stable 0-based index of a label, consistent with logit columns."""
        try:
            return self._index[label]
        except KeyError:
            where = f" ({context})" if context else ""
            raise UnknownLabelError(
                f"unknown phone label {label!r}{where}; inventory has "
                f"{len(self.labels)} phones"
            ) from None

    def label_of(self, index: int) -> str:
        return self.labels[index]

    def is_skip_index(self, index: int) -> bool:
        return self.labels[index] in self.skip_labels

    def scorable_indices(self) -> tuple[int, ...]:
        return tuple(
            i for i, l in enumerate(self.labels) if l not in self.skip_labels
        )


@dataclass(frozen=True)
class FrameLogitMatrix:
    """Per-utterance raw logits, one row per frame, one column per phone.

    Values are held in float64 regardless of the 32-bit on-disk storage so
    that downstream accumulation happens in double precision.
    """

    utterance_id: str
    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.values)
        if arr.ndim != 2:
            raise DataError(
                f"utterance {self.utterance_id!r}: logits must be 2-D, "
                f"got shape {arr.shape}"
            )
        if arr.shape[0] < 1:
            raise DataError(f"utterance {self.utterance_id!r}: no frames")
        if not np.all(np.isfinite(arr)):
            raise DataError(
                f"utterance {self.utterance_id!r}: non-finite logit values"
            )
        object.__setattr__(self, "values", arr)

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_phones(self) -> int:
        return self.values.shape[1]

    def check_width(self, inventory: PhoneInventory) -> None:
        """Reject a matrix/inventory pairing with mismatched width."""
        if self.n_phones != len(inventory):
            raise DataError(
                f"utterance {self.utterance_id!r}: matrix has "
                f"{self.n_phones} phone columns, inventory has "
                f"{len(inventory)}"
            )


@dataclass(frozen=True)
class PhoneSegment:
    """One aligned phone occurrence: [start_frame, end_frame) of a matrix."""

    phone: int
    start_frame: int
    end_frame: int

    def __post_init__(self):
        if self.phone < 0:
            raise DataError(f"negative phone index {self.phone}")
        if self.start_frame < 0:
            raise DataError(f"negative start frame {self.start_frame}")
        if self.end_frame <= self.start_frame:
            raise DataError(
                f"empty segment: frames [{self.start_frame}, {self.end_frame})"
            )

    @property
    def n_frames(self) -> int:
        return self.end_frame - self.start_frame


@dataclass(frozen=True)
class UtteranceAlignment:
    """Ordered, non-overlapping phone segments of one utterance."""

    utterance_id: str
    segments: tuple[PhoneSegment, ...]

    def __post_init__(self):
        segments = tuple(self.segments)
        if not segments:
            raise DataError(f"utterance {self.utterance_id!r}: no segments")
        for prev, cur in zip(segments, segments[1:]):
            if cur.start_frame < prev.end_frame:
                raise DataError(
                    f"utterance {self.utterance_id!r}: segments overlap or "
                    f"are unsorted near frame {cur.start_frame}"
                )
        object.__setattr__(self, "segments", segments)

    def scorable_segments(self, inventory: PhoneInventory) -> tuple[PhoneSegment, ...]:
        return tuple(
            s for s in self.segments if not inventory.is_skip_index(s.phone)
        )


@dataclass(frozen=True)
class PhonePrior:
    """Strictly positive probability vector over the inventory."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.probs)
        if arr.ndim != 1:
            raise DataError(f"prior must be a vector, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DataError("prior contains non-finite entries")
        if np.any(arr <= 0.0):
            raise DataError(
                "prior entries must be strictly positive (smooth upstream)"
            )
        total = float(arr.sum())
        if abs(total - 1.0) > 1e-9:
            raise DataError(f"prior sums to {total!r}, expected 1 within 1e-9")
        object.__setattr__(self, "probs", arr)

    @property
    def log_probs(self) -> np.ndarray:
        return np.log(self.probs)

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class SeverityLabel:
    """Ordinal intelligibility rating keyed by utterance or speaker id."""

    key: str
    severity: int

    def __post_init__(self):
        if not self.key:
            raise DataError("severity label key must be non-empty")
        if not isinstance(self.severity, int) or self.severity < 0:
            raise DataError(
                f"severity for {self.key!r} must be a non-negative integer, "
                f"got {self.severity!r}"
            )


@dataclass(frozen=True)
class GopMethod:
    """One scoring configuration: a normalization plus a scoring function.

    Temperature is required exactly when normalization is SCALE. The DNN
    score embeds its own prior division, so it only composes with
    normalization NONE.
    """

    normalization: Normalization
    scoring: Scoring
    temperature: float | None = None

    def __post_init__(self):
        if self.normalization is Normalization.SCALE:
            if self.temperature is None:
                raise ConfigError("scale normalization requires a temperature")
            if not (float(self.temperature) > 0.0):
                raise ConfigError(
                    f"temperature must be > 0, got {self.temperature!r}"
                )
            object.__setattr__(self, "temperature", float(self.temperature))
        elif self.temperature is not None:
            raise ConfigError(
                "temperature is only meaningful with scale normalization"
            )
        if (
            self.scoring is Scoring.DNN
            and self.normalization is not Normalization.NONE
        ):
            raise ConfigError(
                "dnn scoring embeds its own prior division; use "
                "normalization 'none'"
            )

    @classmethod
    def parse(cls, spec: str, temperature: float | None = None) -> "GopMethod":
        """Parse a 'normalization:scoring' string, e.g. 'prior:maxlogit'."""
        parts = spec.strip().lower().split(":")
        if len(parts) != 2:
            raise UsageError(
                f"method must look like NORM:SCORE, got {spec!r}"
            )
        norm_name, score_name = parts
        try:
            norm = Normalization(norm_name)
        except ValueError:
            choices = ", ".join(n.value for n in Normalization)
            raise UsageError(
                f"unknown normalization {norm_name!r} (choices: {choices})"
            ) from None
        try:
            scoring = Scoring(score_name)
        except ValueError:
            choices = ", ".join(s.value for s in Scoring)
            raise UsageError(
                f"unknown scoring function {score_name!r} (choices: {choices})"
            ) from None
        t = temperature if norm is Normalization.SCALE else None
        if norm is Normalization.SCALE and temperature is None:
            raise UsageError(
                f"method {spec!r} uses scale normalization: pass a temperature"
            )
        return cls(normalization=norm, scoring=scoring, temperature=t)

    @property
    def label(self) -> str:
        base = f"{self.normalization.value}:{self.scoring.value}"
        if self.temperature is not None:
            return f"{base}@T={self.temperature:g}"
        return base

    @property
    def needs_prior(self) -> bool:
        return (
            self.normalization is Normalization.PRIOR
            or self.scoring is Scoring.DNN
        )


# Grid order used in reports: baselines first, then the normalization-major
# sweep of the four uncertainty scores.
_BASELINES = (Scoring.GMM, Scoring.NN, Scoring.DNN)
_UQ_SCORES = (Scoring.ENTROPY, Scoring.MARGIN, Scoring.MAXLOGIT, Scoring.LOGITMARGIN)


def default_method_grid(temperature: float | None = None) -> tuple[GopMethod, ...]:
    """The canonical 15-cell grid: 3 baselines + {none,scale,prior} x 4 UQ
    scores. A temperature is required because the grid has scale rows."""
    if temperature is None:
        raise ConfigError(
            "the default method grid contains scale rows; a temperature is "
            "required"
        )
    methods = [
        GopMethod(Normalization.NONE, s) for s in _BASELINES
    ]
    for norm in (Normalization.NONE, Normalization.SCALE, Normalization.PRIOR):
        for scoring in _UQ_SCORES:
            t = temperature if norm is Normalization.SCALE else None
            methods.append(GopMethod(norm, scoring, t))
    return tuple(methods)


def method_sort_key(method: GopMethod) -> tuple:
    """Deterministic report ordering: canonical grid position first, then
    any non-grid methods sorted by their fields."""
    norm_order = {n: i for i, n in enumerate(Normalization)}
    baseline_order = {s: i for i, s in enumerate(_BASELINES)}
    uq_order = {s: i for i, s in enumerate(_UQ_SCORES)}
    if method.scoring in baseline_order and (
        method.normalization is Normalization.NONE
    ):
        return (0, baseline_order[method.scoring], 0.0)
    if method.scoring in uq_order:
        return (
            1,
            norm_order[method.normalization] * len(_UQ_SCORES)
            + uq_order[method.scoring],
            method.temperature or 0.0,
        )
    return (2, norm_order[method.normalization], method.temperature or 0.0)


def expand_labels(
    labels: Sequence[SeverityLabel],
    speaker_of: Mapping[str, str | None],
    utterance_ids: Iterable[str],
) -> dict[str, int]:
    """Resolve per-utterance severities from utterance- or speaker-keyed
    labels. An utterance-keyed label wins over its speaker's label. Returns
    only the utterances that resolve; callers decide whether gaps are fatal.
    """
    by_key: dict[str, int] = {}
    for label in labels:
        if label.key in by_key and by_key[label.key] != label.severity:
            raise DataError(f"conflicting severity labels for key {label.key!r}")
        by_key[label.key] = label.severity
    resolved: dict[str, int] = {}
    for utt in utterance_ids:
        if utt in by_key:
            resolved[utt] = by_key[utt]
            continue
        speaker = speaker_of.get(utt)
        if speaker is not None and speaker in by_key:
            resolved[utt] = by_key[speaker]
    return resolved
