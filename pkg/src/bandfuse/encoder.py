"""Frame-level encoding of band signals and pooling into fixed-length functionals.

The built-in reference encoder is a deterministic log-mel filterbank that
stands in for heavyweight pre-trained audio models while preserving their
shape contract (T x D frames at a fixed rate). External models plug in
through the same handle interface via the bridge client.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from bandfuse.bands import BandSignal

LOG_FLOOR = 1e-10
HANDCRAFTED_NFFT = 1024
HANDCRAFTED_HOP = 512


class EncoderError(ValueError):
    """Raised on encoder misuse (rate mismatch) or external-encoder failure."""


@dataclass(eq=False)
class FrameEmbeddings:
    """T x D matrix of frame vectors plus the frame rate they were emitted at."""

    frames: np.ndarray
    frame_rate_hz: float

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 2 or self.frames.shape[0] < 1:
            raise EncoderError("frames must be a T x D matrix with T >= 1")
        if not np.all(np.isfinite(self.frames)):
            raise EncoderError("frames contain NaN or Inf")


@dataclass(eq=False)
class Functional:
    """Fixed-length band vector: the temporal mean of the frame matrix."""

    vector: np.ndarray
    band_index: int = 1

    def __post_init__(self):
        self.vector = np.asarray(self.vector, dtype=np.float64)


@dataclass(frozen=True)
class HandcraftedFeatures:
    """Normalized spectral entropy in [0, 1] and mean spectral flux."""

    spectral_entropy: float
    spectral_flux: float

    def as_array(self) -> np.ndarray:
        return np.array([self.spectral_entropy, self.spectral_flux], dtype=np.float64)


class EncoderHandle:
    """Interface every encoder implements: frozen, deterministic frame extraction.

    ``max_input_seconds`` advertises a receptive-duration limit; ``None``
    means the encoder accepts arbitrary-length input.
    """

    name: str = "encoder"
    sample_rate_hz: int = 16000
    dim: int | None = None
    max_input_seconds: float | None = None

    def encode(self, samples: np.ndarray, sample_rate_hz: int) -> FrameEmbeddings:
        raise NotImplementedError


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


@lru_cache(maxsize=16)
def _mel_weights(n_mels: int, n_fft: int, rate_hz: int) -> np.ndarray:
    """Triangular mel filterbank over [0, rate/2], rows are filters."""
    fft_hz = np.fft.rfftfreq(n_fft, d=1.0 / rate_hz)
    mel_pts = np.linspace(0.0, _hz_to_mel(rate_hz / 2.0), n_mels + 2)
    hz_pts = _mel_to_hz(mel_pts)
    weights = np.zeros((n_mels, fft_hz.size))
    for m in range(n_mels):
        lo, center, hi = hz_pts[m], hz_pts[m + 1], hz_pts[m + 2]
        rising = (fft_hz - lo) / max(center - lo, 1e-12)
        falling = (hi - fft_hz) / max(hi - center, 1e-12)
        weights[m] = np.clip(np.minimum(rising, falling), 0.0, None)
    weights.setflags(write=False)
    return weights


def _frame(x: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """Slice x into (T, frame_len) rows; short signals get one zero-padded frame."""
    if x.size < frame_len:
        return np.pad(x, (0, frame_len - x.size))[None, :]
    count = 1 + (x.size - frame_len) // hop
    idx = np.arange(frame_len)[None, :] + hop * np.arange(count)[:, None]
    return x[idx]


class LogMelEncoder(EncoderHandle):
    """Reference encoder: 64-band log-mel filterbank, 25 ms Hann window, 10 ms hop."""

    def __init__(self, sample_rate_hz: int = 16000, n_mels: int = 64,
                 window_s: float = 0.025, hop_s: float = 0.010):
        self.sample_rate_hz = int(sample_rate_hz)
        self.dim = int(n_mels)
        self.win_length = int(round(window_s * self.sample_rate_hz))
        self.hop_length = int(round(hop_s * self.sample_rate_hz))
        self.n_fft = 1 << (self.win_length - 1).bit_length()
        self.name = f"logmel{self.dim}@{self.sample_rate_hz}"
        self.max_input_seconds = None

    def encode(self, samples: np.ndarray, sample_rate_hz: int) -> FrameEmbeddings:
        if int(sample_rate_hz) != self.sample_rate_hz:
            raise EncoderError(
                f"encoder {self.name} expects {self.sample_rate_hz} Hz input, got {sample_rate_hz} Hz"
            )
        x = np.asarray(samples, dtype=np.float64)
        frames = _frame(x, self.win_length, self.hop_length)
        windowed = frames * np.hanning(self.win_length)
        power = np.abs(np.fft.rfft(windowed, n=self.n_fft, axis=1)) ** 2
        mel = power @ _mel_weights(self.dim, self.n_fft, self.sample_rate_hz).T
        logmel = np.log(np.maximum(mel, LOG_FLOOR))
        return FrameEmbeddings(frames=logmel, frame_rate_hz=self.sample_rate_hz / self.hop_length)


def encode(band: BandSignal, encoder: EncoderHandle) -> FrameEmbeddings:
    """Run a band signal through a frozen encoder, yielding T x D frames."""
    return encoder.encode(band.samples, band.sample_rate_hz)


def pool_functional(frames: FrameEmbeddings, band_index: int = 1) -> Functional:
    """Collapse frames to one D-vector by the temporal mean (first-order statistic)."""
    return Functional(vector=frames.frames.mean(axis=0), band_index=band_index)


def _magnitude_frames(x: np.ndarray) -> np.ndarray:
    frames = _frame(x, HANDCRAFTED_NFFT, HANDCRAFTED_HOP)
    return np.abs(np.fft.rfft(frames * np.hanning(HANDCRAFTED_NFFT), axis=1))


def handcrafted(band: BandSignal) -> HandcraftedFeatures:
    """Spectral entropy and flux of a band signal.

    Entropy is the Shannon entropy of the mean power spectrum normalized by
    log K, so 1 means flat (an all-zero band counts as flat by the dither
    convention) and 0 means a single line. Flux is the mean L2 distance
    between consecutive L1-normalized magnitude spectra.
    """
    mag = _magnitude_frames(band.samples)
    power = (mag**2).mean(axis=0)
    total = power.sum()
    k = power.size
    if total <= 0.0:
        entropy = 1.0
    else:
        p = power / total
        nonzero = p[p > 0.0]
        entropy = float(-(nonzero * np.log(nonzero)).sum() / np.log(k))

    sums = mag.sum(axis=1, keepdims=True)
    normed = np.divide(mag, sums, out=np.zeros_like(mag), where=sums > 0.0)
    if normed.shape[0] < 2:
        flux = 0.0
    else:
        flux = float(np.linalg.norm(np.diff(normed, axis=0), axis=1).mean())
    return HandcraftedFeatures(spectral_entropy=entropy, spectral_flux=flux)


@dataclass(eq=False)
class FunctionalStandardizer:
    """Per-(band, dimension) z-scoring fitted on Train functionals only."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, functionals: np.ndarray) -> "FunctionalStandardizer":
        """functionals: (N, B, D) stack of Train-split band functionals."""
        stack = np.asarray(functionals, dtype=np.float64)
        if stack.ndim != 3 or stack.shape[0] < 1:
            raise ValueError("expected a non-empty (N, B, D) stack")
        return cls(mean=stack.mean(axis=0), std=np.maximum(stack.std(axis=0), 1e-8))

    def transform(self, functionals: np.ndarray) -> np.ndarray:
        """Apply to one (B, D) matrix or an (N, B, D) stack."""
        return (np.asarray(functionals, dtype=np.float64) - self.mean) / self.std
