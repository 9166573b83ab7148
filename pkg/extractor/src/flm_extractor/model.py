"""Frame-level phone classifiers.

A classifier owns its phone label set and its stride arithmetic:
frames are hop-spaced windows over audio at the model's sample rate,
and n_frames(n_samples) = ceil(n_samples / hop) -- the tail window is
zero-padded. One logit row per frame, one column per label, raw
pre-softmax values (the scoring engine applies its own softmax).

The default model is a deterministic offline stand-in: log mel
filterbank energies through a fixed-seed linear head. It knows nothing
about phones, but it exercises the full file contract reproducibly with
no checkpoint download. A wav2vec2 adapter is available when torch and
transformers are installed and a checkpoint is reachable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# 39 ARPAbet phones plus silence; column order of every emitted matrix.
ARPABET_LABELS = (
    "aa", "ae", "ah", "ao", "aw", "ay", "b", "ch", "d", "dh",
    "eh", "er", "ey", "f", "g", "hh", "ih", "iy", "jh", "k",
    "l", "m", "n", "ng", "ow", "oy", "p", "r", "s", "sh",
    "t", "th", "uh", "uw", "v", "w", "y", "z", "zh", "sil",
)

DEFAULT_MODEL = "filterbank-linear-v1"


class ModelError(Exception):
    """Unknown model identifier or unusable backend."""


def n_frames_for(n_samples: int, hop: int) -> int:
    """Stride arithmetic shared by all classifiers."""
    return max(1, math.ceil(n_samples / hop))


def _mel_filterbank(n_bands: int, n_fft: int, sample_rate: int) -> np.ndarray:
    def to_mel(hz):
        return 2595.0 * np.log10(1.0 + hz / 700.0)

    def from_mel(mel):
        return 700.0 * (10.0 ** (mel / 2595.0) - 1.0)

    n_bins = n_fft // 2 + 1
    mel_points = np.linspace(to_mel(0.0), to_mel(sample_rate / 2), n_bands + 2)
    bin_points = np.floor(
        (n_fft + 1) * from_mel(mel_points) / sample_rate
    ).astype(int)
    bank = np.zeros((n_bands, n_bins))
    for b in range(n_bands):
        lo, mid, hi = bin_points[b], bin_points[b + 1], bin_points[b + 2]
        mid = max(mid, lo + 1)
        hi = max(hi, mid + 1)
        bank[b, lo:mid] = np.linspace(0.0, 1.0, mid - lo, endpoint=False)
        bank[b, mid:hi] = np.linspace(1.0, 0.0, hi - mid, endpoint=False)
    return bank


@dataclass
class FilterbankLinearClassifier:
    """Deterministic featurizer + fixed-seed linear head.

    window/hop of 400/320 samples at 16 kHz give the usual 50 frames per
    second. Identical audio yields bit-identical logits on every run.
    """

    labels: tuple[str, ...] = ARPABET_LABELS
    sample_rate: int = 16000
    window: int = 400
    hop: int = 320
    n_bands: int = 24
    seed: int = 20240501
    _weights: np.ndarray = field(init=False, repr=False)
    _bias: np.ndarray = field(init=False, repr=False)
    _bank: np.ndarray = field(init=False, repr=False)
    _hann: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        rng = np.random.default_rng(self.seed)
        self._weights = rng.normal(
            scale=0.5, size=(self.n_bands, len(self.labels))
        )
        self._bias = rng.normal(scale=0.1, size=len(self.labels))
        self._bank = _mel_filterbank(self.n_bands, self.window, self.sample_rate)
        self._hann = np.hanning(self.window)

    @property
    def frame_rate(self) -> float:
        return self.sample_rate / self.hop

    def n_frames(self, n_samples: int) -> int:
        return n_frames_for(n_samples, self.hop)

    def logits(self, samples: np.ndarray) -> np.ndarray:
        samples = np.asarray(samples, dtype=np.float64)
        n = self.n_frames(samples.size)
        needed = (n - 1) * self.hop + self.window
        if needed > samples.size:
            samples = np.pad(samples, (0, needed - samples.size))
        frames = np.lib.stride_tricks.sliding_window_view(
            samples, self.window
        )[:: self.hop][:n]
        spectra = np.abs(np.fft.rfft(frames * self._hann, axis=1)) ** 2
        energies = np.log(spectra @ self._bank.T + 1e-10)
        return energies @ self._weights + self._bias


class Wav2Vec2FrameClassifier:
    """Adapter around a HuggingFace wav2vec2-style phone classifier.

    Best effort: requires torch + transformers and a reachable
    checkpoint; frame positions follow the model's convolutional stride
    (hop 320, 20 ms at 16 kHz).
    """

    def __init__(self, model_id: str):
        try:
            import torch
            from transformers import AutoFeatureExtractor, AutoModelForCTC
        except ImportError as exc:
            raise ModelError(
                "the hf: backend needs torch and transformers installed"
            ) from exc
        try:
            self._extractor = AutoFeatureExtractor.from_pretrained(model_id)
            self._model = AutoModelForCTC.from_pretrained(model_id)
        except Exception as exc:
            raise ModelError(f"cannot load checkpoint {model_id!r}: {exc}") from exc
        self._torch = torch
        self._model.eval()
        vocab = self._model.config.vocab_size
        id2label = getattr(self._model.config, "id2label", None) or {}
        self.labels = tuple(
            str(id2label.get(i, f"unit{i:03d}")) for i in range(vocab)
        )
        self.sample_rate = int(self._extractor.sampling_rate)
        self.hop = 320
        self.window = 400

    @property
    def frame_rate(self) -> float:
        return self.sample_rate / self.hop

    def n_frames(self, n_samples: int) -> int:
        return n_frames_for(n_samples, self.hop)

    def logits(self, samples: np.ndarray) -> np.ndarray:
        torch = self._torch
        with torch.no_grad():
            inputs = self._extractor(
                samples, sampling_rate=self.sample_rate, return_tensors="pt"
            )
            out = self._model(**inputs).logits[0].numpy()
        return np.asarray(out, dtype=np.float64)


def resolve_model(identifier: str):
    """Map a model identifier to a classifier instance.

    `filterbank-linear-v1` is the bundled deterministic model;
    `hf:<checkpoint>` loads a wav2vec2-style classifier.
    """
    if identifier == DEFAULT_MODEL:
        return FilterbankLinearClassifier()
    if identifier.startswith("hf:"):
        return Wav2Vec2FrameClassifier(identifier[3:])
    raise ModelError(
        f"unknown model {identifier!r} (try {DEFAULT_MODEL!r} or 'hf:<id>')"
    )
