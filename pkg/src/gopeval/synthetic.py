"""Deterministic synthetic corpora for desk-scale evaluation.

Real intelligibility corpora are license-gated, so the test and demo
pipeline runs on generated data with a known severity signal: every
utterance draws an ordinal severity, and each segment's canonical-phone
logit degrades linearly with that severity while competitor logits stay
flat. With slope 0 there is no signal at all.

Randomness is pinned to a portable generator so fixed-seed corpora are
bit-identical across implementations and languages:

* SplitMix64 (Steele, Lea & Flood's 64-bit mixer; the reference constants
  0x9E3779B97F4A7C15 / 0xBF58476D1CE4E5B9 / 0x94D049BB133111EB).
* uniform() = (next_u64() >> 11) * 2**-53, a double in [0, 1).
* normal() draws u1 (redrawn while exactly 0) then u2, and returns
  sqrt(-2 ln u1) * cos(2 pi u2). One normal per call; the sine mate is
  never used, so there is no hidden cache state.
* randint(n) = floor(uniform() * n).

Draw order per corpus: for each utterance, one randint for its severity;
for each of its segments, one randint for the canonical phone; then for
each frame, one normal per phone column (canonical column included),
always scaled by noise_scale even when that is zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    FrameLogitMatrix,
    PhoneInventory,
    PhonePrior,
    PhoneSegment,
    SeverityLabel,
    UtteranceAlignment,
)
from .errors import ConfigError

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """The pinned 64-bit generator; see the module docstring for the exact
    contract, including the normal-variate transform."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def normal(self) -> float:
        u1 = self.uniform()
        while u1 == 0.0:
            u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def randint(self, n: int) -> int:
        return int(self.uniform() * n)


@dataclass(frozen=True)
class SyntheticConfig:
    n_utterances: int = 200
    n_phones: int = 8
    frames_per_segment: int = 5
    segments_per_utterance: int = 10
    severity_levels: int = 5
    degradation_slope: float = 2.0
    noise_scale: float = 1.0
    seed: int = 42
    # Canonical-phone headroom of 1.0 keeps healthy segments on top while
    # letting noise occasionally flip the argmax, so argmax-relative scores
    # still vary when the slope is zero.
    base_high: float = 1.0
    base_low: float = 0.0
    # None = every phone degrades with severity; otherwise only these do.
    degrading_phones: frozenset[int] | None = None

    def __post_init__(self):
        for name in (
            "n_utterances",
            "n_phones",
            "frames_per_segment",
            "segments_per_utterance",
        ):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.n_phones < 2:
            raise ConfigError("n_phones must be >= 2")
        if self.severity_levels < 2:
            raise ConfigError(
                f"severity_levels must be >= 2, got {self.severity_levels}"
            )
        if self.noise_scale < 0:
            raise ConfigError("noise_scale must be >= 0")
        if self.degrading_phones is not None:
            bad = [p for p in self.degrading_phones if not 0 <= p < self.n_phones]
            if bad:
                raise ConfigError(f"degrading phones out of range: {sorted(bad)}")
            object.__setattr__(
                self, "degrading_phones", frozenset(self.degrading_phones)
            )


@dataclass(frozen=True)
class SyntheticCorpus:
    inventory: PhoneInventory
    matrices: tuple[FrameLogitMatrix, ...]
    alignments: tuple[UtteranceAlignment, ...]
    prior: PhonePrior
    labels: tuple[SeverityLabel, ...]


def generate_synthetic(config: SyntheticConfig) -> SyntheticCorpus:
    """Generate a full corpus (inventory, logits, alignments, prior, labels)
    from the pinned generator; identical configs give identical corpora."""
    rng = SplitMix64(config.seed)
    labels = tuple(f"p{i:02d}" for i in range(config.n_phones))
    inventory = PhoneInventory.from_labels(labels)

    degrades = config.degrading_phones
    matrices: list[FrameLogitMatrix] = []
    alignments: list[UtteranceAlignment] = []
    severities: list[SeverityLabel] = []
    frame_counts = np.zeros(config.n_phones, dtype=np.int64)

    fps = config.frames_per_segment
    for u in range(config.n_utterances):
        utt = f"u{u:04d}"
        severity = rng.randint(config.severity_levels)
        n_frames = config.segments_per_utterance * fps
        values = np.empty((n_frames, config.n_phones))
        segments: list[PhoneSegment] = []
        for s in range(config.segments_per_utterance):
            phone = rng.randint(config.n_phones)
            slope = config.degradation_slope if (
                degrades is None or phone in degrades
            ) else 0.0
            canonical = config.base_high - slope * severity
            start = s * fps
            for f in range(start, start + fps):
                for q in range(config.n_phones):
                    noise = rng.normal() * config.noise_scale
                    base = canonical if q == phone else config.base_low
                    values[f, q] = base + noise
            segments.append(
                PhoneSegment(phone=phone, start_frame=start, end_frame=start + fps)
            )
            frame_counts[phone] += fps
        matrices.append(FrameLogitMatrix(utterance_id=utt, values=values))
        alignments.append(
            UtteranceAlignment(utterance_id=utt, segments=tuple(segments))
        )
        severities.append(SeverityLabel(key=utt, severity=severity))

    smoothed = (frame_counts + 1).astype(np.float64)
    prior = PhonePrior(probs=smoothed / smoothed.sum())
    return SyntheticCorpus(
        inventory=inventory,
        matrices=tuple(matrices),
        alignments=tuple(alignments),
        prior=prior,
        labels=tuple(severities),
    )
