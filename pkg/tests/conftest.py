"""Shared fixtures: tone clips and the synthetic two-class chirp dataset.

The chirp dataset is built once per session: 200 clip pairs at 250 kHz
where both members of a pair share the exact same baseband noise and
differ only in a short chirp placed inside the 48-56 kHz band (band 7 of
the 16-band plan at f_m = 16 kHz). Class "low" chirps sweep ~49-50 kHz,
class "high" ~53.5-55 kHz, so baseband-only features carry no label
information while any method that reaches band 7 separates the classes.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import pytest
from scipy.signal import chirp as chirp_sweep
from scipy.signal.windows import hann

from bandfuse.signal_io import AudioClip, save_wav

RATE = 250_000
MODEL_RATE = 16_000
CHIRP_BAND = 7  # 48-56 kHz in the 16-band plan
PAIRS = {"train": 140, "val": 30, "test": 30}
DATASET_SEED = 20260815


def make_tone_clip(freq_hz: float, rate_hz: int, duration_s: float,
                   amplitude: float = 1.0, source_id: str = "tone") -> AudioClip:
    n = int(round(duration_s * rate_hz))
    t = np.arange(n) / rate_hz
    return AudioClip(samples=amplitude * np.sin(2 * np.pi * freq_hz * t),
                     sample_rate_hz=rate_hz, source_id=source_id)


def bandlimited_noise(rng: np.random.Generator, n: int, rate_hz: int,
                      low_hz: float, high_hz: float, rms: float) -> np.ndarray:
    """Gaussian noise confined to [low_hz, high_hz] built in the DFT domain."""
    spectrum = np.zeros(n // 2 + 1, dtype=complex)
    freqs = np.fft.rfftfreq(n, d=1.0 / rate_hz)
    band = (freqs >= low_hz) & (freqs <= high_hz)
    spectrum[band] = rng.standard_normal(band.sum()) + 1j * rng.standard_normal(band.sum())
    noise = np.fft.irfft(spectrum, n=n)
    return noise * (rms / np.sqrt(np.mean(noise ** 2)))


def windowed_chirp(rng: np.random.Generator, n_total: int, rate_hz: int,
                   f_start: float, f_end: float, amplitude: float) -> np.ndarray:
    seg = int(0.05 * rate_hz)
    offset = int(rng.integers(0, n_total - seg + 1))
    t = np.arange(seg) / rate_hz
    sweep = chirp_sweep(t, f0=f_start, t1=t[-1], f1=f_end) * hann(seg)
    out = np.zeros(n_total)
    out[offset:offset + seg] = amplitude * sweep
    return out


def build_chirp_dataset(root: Path) -> Path:
    """Write the paired-noise WAV corpus and its manifest; returns manifest path."""
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(DATASET_SEED)
    rows = []
    pair_index = 0
    for split, count in PAIRS.items():
        for _ in range(count):
            n = int(rng.integers(50_000, 62_501))
            noise = bandlimited_noise(rng, n, RATE, 20.0, 7_600.0, rms=0.05)
            low_start = rng.uniform(48_900.0, 49_100.0)
            low_sweep = windowed_chirp(rng, n, RATE, low_start,
                                       low_start + rng.uniform(900.0, 1_100.0), 0.15)
            high_start = rng.uniform(53_400.0, 53_600.0)
            high_sweep = windowed_chirp(rng, n, RATE, high_start,
                                        high_start + rng.uniform(1_300.0, 1_700.0), 0.15)
            for label, sweep in (("lowchirp", low_sweep), ("highchirp", high_sweep)):
                name = f"pair{pair_index:03d}_{label}.wav"
                save_wav(root / name, noise + sweep, RATE)
                rows.append((str(root / name), label, split))
            pair_index += 1
    manifest = root / "manifest.csv"
    with open(manifest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "label", "split"])
        writer.writerows(rows)
    return manifest


@pytest.fixture(scope="session")
def chirp_manifest(tmp_path_factory) -> Path:
    return build_chirp_dataset(tmp_path_factory.mktemp("chirp_dataset"))


def make_small_dataset(root: Path, rate_hz: int = 48_000, duration_s: float = 0.25,
                       counts: dict | None = None, seed: int = 77) -> Path:
    """Tiny two-class tone corpus for harness/CLI tests: 5 kHz vs 19 kHz.

    The 19 kHz tone sits above f_m/2 = 8 kHz, so the baseband path cannot
    see it; after heterodyning it lands at 3 kHz in band 3, a different
    mel pattern from the 5 kHz class, so even band-agnostic pooling
    separates the classes. Cheap (0.25 s at 48 kHz, 3 bands).
    """
    counts = counts or {"train": 8, "val": 4, "test": 4}
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    n = int(round(rate_hz * duration_s))
    t = np.arange(n) / rate_hz
    rows = []
    idx = 0
    for split, total in counts.items():
        for k in range(total):
            label, freq = ("lowtone", 5_000.0) if k % 2 == 0 else ("hightone", 19_000.0)
            samples = 0.4 * np.sin(2 * np.pi * freq * t + rng.uniform(0, 2 * np.pi))
            samples = samples + 0.05 * rng.standard_normal(n)
            path = root / f"clip{idx:03d}_{label}.wav"
            save_wav(path, samples, rate_hz)
            rows.append((str(path), label, split))
            idx += 1
    manifest = root / "manifest.csv"
    with open(manifest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "label", "split"])
        writer.writerows(rows)
    return manifest


@pytest.fixture(scope="session")
def small_manifest(tmp_path_factory) -> Path:
    return make_small_dataset(tmp_path_factory.mktemp("small_dataset"))


@pytest.fixture(scope="session")
def small_cache_dir(tmp_path_factory) -> Path:
    return tmp_path_factory.mktemp("small_cache")


# ---------------------------------------------------------------------------
# fusion test helpers

def fusion_gradcheck_errors(strategy: str, seed: int, n_samples: int = 5,
                            band_count: int = 4, dim: int = 8, class_count: int = 3,
                            step: float = 1e-4) -> dict[str, float]:
    """Analytic-vs-central-difference relative error per parameter tensor.

    Parameters are nudged off their init (zero gate layers have flat loss
    surfaces right at zero) and every coordinate is probed; the error for a
    tensor is ||a - n|| / max(||a||, ||n||, 1e-8).
    """
    from bandfuse.fusion import FusionConfig, init_model, loss_and_grads

    rng = np.random.default_rng(seed)
    config = FusionConfig(strategy=strategy, band_count=band_count, dim=dim,
                          class_count=class_count, seed=seed, gate_hidden=5, attn_heads=4)
    model = init_model(config)
    for key, value in model.params.items():
        model.params[key] = value + 0.05 * rng.standard_normal(value.shape)
    f = rng.standard_normal((n_samples, band_count, dim))
    hc = rng.random((n_samples, band_count, 2))
    labels = rng.integers(0, class_count, size=n_samples)

    _, grads = loss_and_grads(model, f, hc, labels)
    errors = {}
    for key, params in model.params.items():
        numeric = np.zeros_like(params)
        it = np.nditer(params, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = params[idx]
            params[idx] = orig + step
            hi, _ = loss_and_grads(model, f, hc, labels)
            params[idx] = orig - step
            lo, _ = loss_and_grads(model, f, hc, labels)
            params[idx] = orig
            numeric[idx] = (hi - lo) / (2 * step)
            it.iternext()
        analytic = np.asarray(grads[key])
        denom = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-8)
        errors[key] = float(np.linalg.norm(analytic - numeric) / denom)
    return errors


def make_separable_sets(rng: np.random.Generator, n: int, band_count: int = 2,
                        dim: int = 6, class_count: int = 2, noise: float = 0.3):
    """Toy feature sets where each class lights up its own dims in its own band."""
    from bandfuse.fusion import BandFeatureSet

    sets = []
    for i in range(n):
        label = int(rng.integers(0, class_count))
        f = rng.standard_normal((band_count, dim)) * noise
        band = label % band_count
        lo = (label * dim) // class_count
        hi = ((label + 1) * dim) // class_count
        f[band, lo:hi] += 2.0
        sets.append(BandFeatureSet(functionals=f, handcrafted=rng.random((band_count, 2)),
                                   label=label))
    return sets


@pytest.fixture(scope="session")
def chirp_cache_dir(tmp_path_factory) -> Path:
    # shared across tests so the expensive decomposition runs once
    return tmp_path_factory.mktemp("chirp_cache")
