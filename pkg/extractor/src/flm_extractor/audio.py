"""Audio decoding: stdlib WAV first, soundfile for anything else.

Everything comes back as mono float64 in [-1, 1] plus the sample rate;
multi-channel input is averaged. Resampling to the classifier's rate is
linear interpolation -- adequate for an adapter whose job is plumbing,
not fidelity.
"""

from __future__ import annotations

import wave

import numpy as np


class AudioError(Exception):
    """File missing, undecodable, or an unsupported encoding."""


_PCM_SCALE = {1: 127.0, 2: 32767.0, 4: 2147483647.0}


def read_wav(path) -> tuple[np.ndarray, int]:
    try:
        with wave.open(str(path), "rb") as f:
            n_channels = f.getnchannels()
            width = f.getsampwidth()
            rate = f.getframerate()
            n_frames = f.getnframes()
            raw = f.readframes(n_frames)
    except (wave.Error, EOFError, OSError) as exc:
        raise AudioError(f"{path}: cannot decode WAV: {exc}") from exc
    if width not in _PCM_SCALE:
        raise AudioError(f"{path}: unsupported sample width {width}")
    if width == 1:
        samples = np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0
    else:
        dtype = "<i2" if width == 2 else "<i4"
        samples = np.frombuffer(raw, dtype=dtype).astype(np.float64)
    samples /= _PCM_SCALE[width]
    if n_channels > 1:
        samples = samples.reshape(-1, n_channels).mean(axis=1)
    if samples.size == 0:
        raise AudioError(f"{path}: no samples")
    return samples, rate


def read_audio(path) -> tuple[np.ndarray, int]:
    """Decode an audio file to mono float64; WAV via the stdlib, other
    containers via soundfile when it is installed."""
    if str(path).lower().endswith(".wav"):
        return read_wav(path)
    try:
        import soundfile
    except ImportError:
        raise AudioError(
            f"{path}: only .wav is supported without the soundfile package"
        ) from None
    try:
        samples, rate = soundfile.read(str(path), dtype="float64")
    except Exception as exc:  # soundfile raises its own hierarchy
        raise AudioError(f"{path}: cannot decode: {exc}") from exc
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if samples.size == 0:
        raise AudioError(f"{path}: no samples")
    return samples, int(rate)


def resample_linear(samples: np.ndarray, rate: int, target_rate: int) -> np.ndarray:
    if rate == target_rate:
        return samples
    duration = samples.size / rate
    n_out = max(1, int(round(duration * target_rate)))
    positions = np.arange(n_out) * (rate / target_rate)
    return np.interp(positions, np.arange(samples.size), samples)
