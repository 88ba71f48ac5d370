"""Spectral band planning, heterodyne down-mixing, and rate conversion.

A recording at native rate ``f_s`` is split into ``B = ceil(f_s / f_m)``
contiguous bands of width ``f_m / 2``, where ``f_m`` is the sample rate the
downstream encoder expects. Band 1 is the ordinary baseband; every higher
band is band-pass filtered, multiplied by a cosine at its lower edge to
translate it down to [0, f_m/2], low-pass filtered, and resampled to
``f_m``. The time-expansion and plain-baseband baselines live here too.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd

import numpy as np
from scipy import signal as sps

from bandfuse.signal_io import AudioClip

# Filter design targets shared by every FIR stage.
STOPBAND_DB = 60.0
TRANSITION_FRACTION = 0.05  # transition width as a fraction of the band half-width f_m/2
DC_BLOCK_HZ = 20.0


class BandPlanError(ValueError):
    """Raised when no multi-band plan exists (native rate below model rate)."""


@dataclass(frozen=True)
class Band:
    index: int
    low_hz: float
    high_hz: float
    shift_hz: float


@dataclass(frozen=True)
class BandPlan:
    """Frequency geometry of one decomposition: B contiguous bands of width f_m/2."""

    model_rate_hz: int
    native_rate_hz: int
    bands: tuple[Band, ...]

    @property
    def band_count(self) -> int:
        return len(self.bands)

    def band(self, index: int) -> Band:
        if not 1 <= index <= len(self.bands):
            raise IndexError(f"band index {index} out of range 1..{len(self.bands)}")
        return self.bands[index - 1]


@dataclass(eq=False)
class BandSignal:
    """One band's waveform; after resampling its rate equals the model rate."""

    band_index: int
    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        self.sample_rate_hz = int(self.sample_rate_hz)


def compute_band_plan(native_rate_hz: int, model_rate_hz: int) -> BandPlan:
    """Plan B = ceil(f_s / f_m) bands of width f_m/2 tiling [0, B*f_m/2].

    Band b spans [(b-1)*f_m/2, b*f_m/2] and is mixed down by its lower edge,
    so band 1 keeps shift 0. The top band may extend past Nyquist; the region
    above f_s/2 holds no energy by construction.
    """
    f_s, f_m = int(native_rate_hz), int(model_rate_hz)
    if f_m <= 0:
        raise BandPlanError(f"model rate must be positive, got {f_m}")
    if f_s < f_m:
        raise BandPlanError(
            f"native rate {f_s} Hz below model rate {f_m} Hz; no bands to split, use the baseband path"
        )
    count = -(-f_s // f_m)  # ceil for positive ints
    half_width = f_m / 2.0
    bands = tuple(
        Band(index=b, low_hz=(b - 1) * half_width, high_hz=b * half_width, shift_hz=(b - 1) * half_width)
        for b in range(1, count + 1)
    )
    return BandPlan(model_rate_hz=f_m, native_rate_hz=f_s, bands=bands)


@lru_cache(maxsize=256)
def _fir_taps(rate_hz: int, cutoffs: tuple, kind: str, transition_hz: float) -> np.ndarray:
    """Kaiser-windowed sinc FIR taps (odd length, >=60 dB stopband)."""
    width = transition_hz / (rate_hz / 2.0)
    ntaps, beta = sps.kaiserord(STOPBAND_DB, width)
    ntaps |= 1
    taps = sps.firwin(ntaps, list(cutoffs), window=("kaiser", beta), pass_zero=kind, fs=rate_hz)
    taps.setflags(write=False)
    return taps


def _fir_zero_phase(x: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Apply a linear-phase FIR with centered alignment; reflect-pad to kill edge transients."""
    pad = len(taps)
    xp = np.pad(x, pad, mode="reflect") if x.size > 1 else np.full(x.size + 2 * pad, x[0])
    y = sps.fftconvolve(xp, taps, mode="same")
    return y[pad:-pad]


def _dc_block(x: np.ndarray, rate_hz: int) -> np.ndarray:
    """Gentle zero-phase high-pass (first-order Butterworth at 20 Hz, forward-backward)."""
    b, a = sps.butter(1, DC_BLOCK_HZ, btype="highpass", fs=rate_hz)
    padlen = min(x.size - 1, int(rate_hz / 10))
    return sps.filtfilt(b, a, x, padtype="even", padlen=max(padlen, 0))


def extract_band(clip: AudioClip, plan: BandPlan, band_index: int) -> BandSignal:
    """Band-pass the raw signal onto one plan band, zero phase, at the native rate.

    Band 1 only needs the low-pass at f_m/2; bands reaching past Nyquist drop
    their upper cutoff (nothing exists up there to reject).
    """
    band = plan.band(band_index)
    if clip.sample_rate_hz != plan.native_rate_hz:
        raise ValueError(
            f"clip rate {clip.sample_rate_hz} Hz does not match plan native rate {plan.native_rate_hz} Hz"
        )
    nyq = plan.native_rate_hz / 2.0
    transition = TRANSITION_FRACTION * (plan.model_rate_hz / 2.0)
    x = clip.samples

    if band.low_hz <= 0.0 and band.high_hz >= nyq:
        y = x.copy()
    elif band.low_hz <= 0.0:
        taps = _fir_taps(plan.native_rate_hz, (band.high_hz,), "lowpass", transition)
        y = _fir_zero_phase(x, taps)
    elif band.high_hz >= nyq:
        taps = _fir_taps(plan.native_rate_hz, (band.low_hz,), "highpass", transition)
        y = _fir_zero_phase(x, taps)
    else:
        taps = _fir_taps(plan.native_rate_hz, (band.low_hz, band.high_hz), "bandpass", transition)
        y = _fir_zero_phase(x, taps)
    return BandSignal(band_index=band.index, samples=y, sample_rate_hz=plan.native_rate_hz)


def heterodyne_to_baseband(band: BandSignal, plan: BandPlan) -> BandSignal:
    """Mix one extracted band down to [0, f_m/2] at the native rate.

    Multiplies by cos(2*pi*shift*t) where shift is the band's lower edge,
    low-passes at f_m/2 to drop the sum image, doubles the result to undo
    the 1/2 from the product-to-sum identity, and high-passes at 20 Hz to
    suppress the DC line produced by content sitting exactly at the shift
    frequency. Band 1 passes through unchanged.
    """
    if band.band_index == 1:
        return BandSignal(band.band_index, band.samples.copy(), band.sample_rate_hz)
    spec = plan.band(band.band_index)
    f_s = plan.native_rate_hz
    if band.sample_rate_hz != f_s:
        raise ValueError(f"band rate {band.sample_rate_hz} Hz does not match plan native rate {f_s} Hz")

    t = np.arange(band.samples.size) / f_s
    mixed = 2.0 * band.samples * np.cos(2.0 * np.pi * spec.shift_hz * t)

    cutoff = plan.model_rate_hz / 2.0
    if cutoff < f_s / 2.0:
        transition = TRANSITION_FRACTION * cutoff
        mixed = _fir_zero_phase(mixed, _fir_taps(f_s, (cutoff,), "lowpass", transition))
    mixed = _dc_block(mixed, f_s)
    return BandSignal(band_index=band.band_index, samples=mixed, sample_rate_hz=f_s)


@lru_cache(maxsize=64)
def _resample_kernel(up: int, down: int) -> np.ndarray:
    """Anti-alias kernel for polyphase resampling, designed at the upsampled rate."""
    max_rate = max(up, down)
    width = TRANSITION_FRACTION / max_rate  # 5% of the target band edge, Nyquist-normalized
    ntaps, beta = sps.kaiserord(STOPBAND_DB, width)
    ntaps |= 1
    taps = sps.firwin(ntaps, 1.0 / max_rate, window=("kaiser", beta))
    taps.setflags(write=False)
    return taps


def _rational_resample(x: np.ndarray, from_rate: int, to_rate: int) -> np.ndarray:
    g = gcd(int(to_rate), int(from_rate))
    up, down = int(to_rate) // g, int(from_rate) // g
    if up == down:
        return x.copy()
    y = sps.resample_poly(x, up, down, window=_resample_kernel(up, down))
    target = (2 * x.size * up + down) // (2 * down)  # round(n*up/down), exact in ints
    if y.size > target:
        y = y[:target]
    elif y.size < target:
        y = np.concatenate([y, np.zeros(target - y.size)])
    return y


def resample_to_model(band: BandSignal, plan: BandPlan) -> BandSignal:
    """Polyphase-resample a baseband-confined band signal from f_s to f_m."""
    y = _rational_resample(band.samples, band.sample_rate_hz, plan.model_rate_hz)
    return BandSignal(band_index=band.band_index, samples=y, sample_rate_hz=plan.model_rate_hz)


def decompose(clip: AudioClip, model_rate_hz: int) -> list[BandSignal]:
    """Full pipeline: plan -> band-pass -> heterodyne -> resample, for every band.

    Returns B band signals at the model rate, ordered by band index.
    """
    plan = compute_band_plan(clip.sample_rate_hz, model_rate_hz)
    out = []
    for b in range(1, plan.band_count + 1):
        band = extract_band(clip, plan, b)
        if b >= 2:
            band = heterodyne_to_baseband(band, plan)
        out.append(resample_to_model(band, plan))
    return out


def time_expand(clip: AudioClip, model_rate_hz: int) -> BandSignal:
    """Slow the clip down by k = f_s / f_m by relabeling its sample rate.

    Sample values are untouched; a tone at f appears at f/k and the duration
    grows by k. With f_s = f_m this is the identity.
    """
    return BandSignal(band_index=1, samples=clip.samples.copy(), sample_rate_hz=int(model_rate_hz))


def to_baseband(clip: AudioClip, model_rate_hz: int) -> BandSignal:
    """Anti-aliased resample of the raw clip to f_m (the baseband baseline).

    Matches band 1 of :func:`decompose` by construction: same low-pass, same
    resampler. Content above f_m/2 is discarded.
    """
    f_m = int(model_rate_hz)
    if clip.sample_rate_hz >= f_m:
        plan = compute_band_plan(clip.sample_rate_hz, f_m)
        return resample_to_model(extract_band(clip, plan, 1), plan)
    y = _rational_resample(clip.samples, clip.sample_rate_hz, f_m)
    return BandSignal(band_index=1, samples=y, sample_rate_hz=f_m)
