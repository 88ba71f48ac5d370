"""Band planning, heterodyne mapping, and resampling, checked against FFT oracles."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bandfuse.bands import (
    BandPlanError,
    BandSignal,
    _rational_resample,
    compute_band_plan,
    decompose,
    extract_band,
    heterodyne_to_baseband,
    resample_to_model,
    time_expand,
    to_baseband,
)
from bandfuse.signal_io import AudioClip

from conftest import make_tone_clip


def rfft_power(x: np.ndarray) -> np.ndarray:
    return np.abs(np.fft.rfft(x)) ** 2


def peak_freq(x: np.ndarray, rate_hz: int) -> float:
    return float(np.argmax(rfft_power(x)) * rate_hz / x.size)


# ---------------------------------------------------------------------------
# band plan geometry

def test_band_plan_ultrasonic_recorder():
    plan = compute_band_plan(250_000, 16_000)
    assert plan.band_count == 16
    assert plan.band(1).low_hz == 0.0
    assert plan.band(1).shift_hz == 0.0
    assert plan.band(7).low_hz == 48_000.0
    assert plan.band(7).high_hz == 56_000.0
    assert plan.band(7).shift_hz == 48_000.0
    assert plan.band(16).high_hz == 128_000.0  # may pass Nyquist (125 kHz)


def test_band_plan_audible_recorder():
    plan = compute_band_plan(44_100, 16_000)
    assert plan.band_count == 3


def test_band_plan_equal_rates_single_band():
    plan = compute_band_plan(16_000, 16_000)
    assert plan.band_count == 1
    assert plan.band(1).high_hz == 8_000.0


def test_band_plan_errors():
    with pytest.raises(BandPlanError):
        compute_band_plan(8_000, 16_000)
    with pytest.raises(BandPlanError):
        compute_band_plan(16_000, 0)
    with pytest.raises(IndexError):
        compute_band_plan(48_000, 16_000).band(4)
    with pytest.raises(IndexError):
        compute_band_plan(48_000, 16_000).band(0)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=1_000, max_value=500_000), st.integers(min_value=1_000, max_value=64_000))
def test_band_plan_properties(f_s, f_m):
    if f_s < f_m:
        with pytest.raises(BandPlanError):
            compute_band_plan(f_s, f_m)
        return
    plan = compute_band_plan(f_s, f_m)
    assert plan.band_count == -(-f_s // f_m)  # ceil
    half = f_m / 2.0
    for i, band in enumerate(plan.bands, start=1):
        assert band.index == i
        assert band.high_hz - band.low_hz == pytest.approx(half)
        assert band.shift_hz == band.low_hz
    # contiguous tiling from 0, covering the native Nyquist
    assert plan.bands[0].low_hz == 0.0
    for a, b in zip(plan.bands, plan.bands[1:]):
        assert a.high_hz == b.low_hz
    assert plan.bands[-1].high_hz >= f_s / 2.0


# ---------------------------------------------------------------------------
# band extraction

def test_extract_band_isolates_tone():
    # 12 kHz tone lives in band 2 (8-16 kHz) of the 48 kHz / 16 kHz plan
    clip = make_tone_clip(12_000, 48_000, 0.25)
    plan = compute_band_plan(48_000, 16_000)
    energies = []
    for b in range(1, 4):
        band = extract_band(clip, plan, b)
        energies.append(np.sum(band.samples ** 2))
    total = sum(energies)
    assert energies[1] / total > 0.99
    assert energies[0] / total < 1e-4
    assert energies[2] / total < 1e-4


def test_extract_band_rate_mismatch():
    clip = make_tone_clip(1_000, 44_100, 0.05)
    plan = compute_band_plan(48_000, 16_000)
    with pytest.raises(ValueError, match="does not match"):
        extract_band(clip, plan, 1)


def test_extract_band_single_band_plan_is_copy():
    clip = make_tone_clip(3_000, 16_000, 0.05)
    plan = compute_band_plan(16_000, 16_000)
    band = extract_band(clip, plan, 1)
    np.testing.assert_array_equal(band.samples, clip.samples)
    assert band.samples is not clip.samples


# ---------------------------------------------------------------------------
# heterodyne mapping

def test_heterodyne_translates_tone_to_f_minus_shift():
    # tone at 12 kHz, band 2 shift 8 kHz -> expect 4 kHz at the model rate
    clip = make_tone_clip(12_000, 48_000, 0.2)
    bands = decompose(clip, 16_000)
    assert peak_freq(bands[1].samples, 16_000) == pytest.approx(4_000, abs=16_000 / bands[1].samples.size)
    # energy went to band 2, not elsewhere
    energies = [np.sum(b.samples ** 2) for b in bands]
    assert energies[1] / sum(energies) > 0.99


def test_heterodyne_amplitude_compensation():
    # the x2 factor undoes the cosine product halving: unit tone stays unit
    clip = make_tone_clip(12_000, 48_000, 0.2)
    bands = decompose(clip, 16_000)
    rms = np.sqrt(np.mean(bands[1].samples ** 2))
    assert rms == pytest.approx(1 / np.sqrt(2), rel=0.02)


def test_heterodyne_band1_passthrough():
    clip = make_tone_clip(2_000, 48_000, 0.1)
    plan = compute_band_plan(48_000, 16_000)
    band = extract_band(clip, plan, 1)
    out = heterodyne_to_baseband(band, plan)
    np.testing.assert_array_equal(out.samples, band.samples)
    assert out.samples is not band.samples


def test_heterodyne_blocks_dc():
    # content at the shift frequency itself lands at DC and must be suppressed
    clip = make_tone_clip(8_000 + 40.0, 48_000, 0.3)
    bands = decompose(clip, 16_000)
    assert abs(np.mean(bands[1].samples)) < 1e-3
    # 40 Hz survives the 20 Hz high-pass only partially; nothing blows up
    assert np.all(np.isfinite(bands[1].samples))


def test_heterodyne_rate_mismatch():
    plan = compute_band_plan(48_000, 16_000)
    band = BandSignal(band_index=2, samples=np.zeros(100), sample_rate_hz=44_100)
    with pytest.raises(ValueError, match="does not match"):
        heterodyne_to_baseband(band, plan)


# ---------------------------------------------------------------------------
# time expansion

def test_time_expand_relabels_rate_only():
    clip = make_tone_clip(10_000, 50_000, 0.1)
    band = time_expand(clip, 16_000)
    np.testing.assert_array_equal(band.samples, clip.samples)
    assert band.samples is not clip.samples
    assert band.sample_rate_hz == 16_000
    # k = 50000/16000 = 3.125, so the 10 kHz tone reads as 3.2 kHz
    assert peak_freq(band.samples, 16_000) == pytest.approx(3_200, abs=16_000 / band.samples.size)


def test_time_expand_identity_when_rates_match():
    clip = make_tone_clip(3_000, 16_000, 0.1)
    band = time_expand(clip, 16_000)
    assert band.sample_rate_hz == clip.sample_rate_hz
    np.testing.assert_array_equal(band.samples, clip.samples)


# ---------------------------------------------------------------------------
# resampling

@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=2, max_value=5_000),
    st.integers(min_value=1_000, max_value=250_000),
    st.integers(min_value=1_000, max_value=64_000),
)
def test_resample_length_contract(n, f_s, f_m):
    y = _rational_resample(np.zeros(n), f_s, f_m)
    expected = int(Fraction(n * f_m, f_s) + Fraction(1, 2))  # round half up, exact
    assert y.size == expected


def test_resample_identity_is_copy():
    x = np.arange(10, dtype=float)
    y = _rational_resample(x, 16_000, 16_000)
    np.testing.assert_array_equal(x, y)
    assert y is not x


def test_resample_preserves_tone():
    clip = make_tone_clip(1_000, 48_000, 0.25)
    band = BandSignal(band_index=1, samples=clip.samples, sample_rate_hz=48_000)
    plan = compute_band_plan(48_000, 16_000)
    out = resample_to_model(band, plan)
    assert out.sample_rate_hz == 16_000
    assert out.samples.size == clip.samples.size // 3
    assert peak_freq(out.samples, 16_000) == pytest.approx(1_000, abs=16_000 / out.samples.size)
    rms = np.sqrt(np.mean(out.samples ** 2))
    assert rms == pytest.approx(1 / np.sqrt(2), rel=0.02)


# ---------------------------------------------------------------------------
# full decomposition and baselines

def test_decompose_structure():
    clip = make_tone_clip(5_000, 44_100, 0.2)
    bands = decompose(clip, 16_000)
    assert [b.band_index for b in bands] == [1, 2, 3]
    expected_len = int(Fraction(clip.samples.size * 16_000, 44_100) + Fraction(1, 2))
    for band in bands:
        assert band.sample_rate_hz == 16_000
        assert band.samples.size == expected_len


def test_decompose_roughly_conserves_energy():
    rng = np.random.default_rng(3)
    clip = AudioClip(samples=rng.standard_normal(48_000 // 2), sample_rate_hz=48_000, source_id="noise")
    bands = decompose(clip, 16_000)
    native_energy = np.sum(clip.samples ** 2) / clip.sample_rate_hz
    band_energy = sum(np.sum(b.samples ** 2) / b.sample_rate_hz for b in bands)
    assert band_energy / native_energy == pytest.approx(1.0, rel=0.05)


def test_decompose_tiny_clip_does_not_crash():
    clip = AudioClip(samples=np.array([0.1, -0.2, 0.3, 0.0, 0.05]), sample_rate_hz=48_000, source_id="tiny")
    bands = decompose(clip, 16_000)
    assert len(bands) == 3
    for band in bands:
        assert np.all(np.isfinite(band.samples))


def test_to_baseband_equals_decompose_band1():
    rng = np.random.default_rng(5)
    clip = AudioClip(samples=rng.standard_normal(9_600), sample_rate_hz=48_000, source_id="noise")
    bb = to_baseband(clip, 16_000)
    band1 = decompose(clip, 16_000)[0]
    np.testing.assert_array_equal(bb.samples, band1.samples)


def test_to_baseband_upsamples_when_native_is_slower():
    clip = make_tone_clip(1_000, 8_000, 0.2)
    bb = to_baseband(clip, 16_000)
    assert bb.sample_rate_hz == 16_000
    assert bb.samples.size == 2 * clip.samples.size
    assert peak_freq(bb.samples, 16_000) == pytest.approx(1_000, abs=16_000 / bb.samples.size)
