"""End-to-end experiment runner: decompose, encode, train probes, score Test.

Methods:
  BB          baseband only (low-pass + resample to the model rate)
  TE          time expansion (relabel the native rate as the model rate)
  MP/GP/MoE/HYB/SA   multi-band decomposition followed by trainable fusion

BB and TE produce a single band whose functional feeds a linear probe
(mean-pool fusion with B=1); the multi-band methods share one decomposition
pass and differ only in the fusion strategy. Per-clip features are cached
on disk keyed by clip content and extraction parameters, so re-runs skip
the DSP and encoding work entirely.
"""

from __future__ import annotations

import csv
import hashlib
import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from bandfuse.bands import compute_band_plan, decompose, time_expand, to_baseband
from bandfuse.bridge import ExternalEncoder
from bandfuse.encoder import (
    EncoderHandle,
    FunctionalStandardizer,
    LogMelEncoder,
    encode,
    handcrafted,
    pool_functional,
)
from bandfuse.fusion import BandFeatureSet, FusionConfig, FusionModel, save_model, train
from bandfuse.fusion import predict_batch
from bandfuse.signal_io import DatasetManifest, load_clip, load_manifest

METHODS = ("BB", "TE", "MP", "GP", "MoE", "HYB", "SA")
_FUSION_METHODS = ("MP", "GP", "MoE", "HYB", "SA")
# feature extraction stage shared by methods: BB and TE are single-band,
# every fusion strategy reuses the same multi-band (MB) decomposition
_STAGE = {"BB": "BB", "TE": "TE"} | {m: "MB" for m in _FUSION_METHODS}

CACHE_VERSION = 1
REPORT_VERSION = 1


class HarnessError(ValueError):
    """Raised on invalid experiment configuration or inputs."""


@dataclass
class ExperimentSpec:
    manifest_path: str
    output_dir: str
    methods: tuple[str, ...] = METHODS
    encoder: str = "builtin"
    f_m_hz: int = 16000
    seed: int = 0
    epochs: int = 20
    learning_rate: float = 1e-2
    batch_size: int = 32
    momentum: float = 0.9
    gate_hidden: int = 64
    attn_heads: int = 4
    encoder_window_s: float | None = None
    workers: int = 1
    cache_dir: str | None = None

    def __post_init__(self):
        self.methods = tuple(self.methods)
        if not self.methods:
            raise HarnessError("methods must be non-empty")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise HarnessError(f"unknown methods {unknown}, expected a subset of {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise HarnessError("duplicate methods in experiment spec")
        if self.f_m_hz <= 0:
            raise HarnessError("f_m_hz must be positive")
        if self.workers < 1:
            raise HarnessError("workers must be >= 1")


@dataclass(frozen=True)
class ResultRow:
    method: str
    encoder: str
    dataset_id: str
    test_accuracy: float
    val_accuracy: float
    wall_time_s: float

    def __post_init__(self):
        for name in ("test_accuracy", "val_accuracy"):
            value = getattr(self, name)
            if not 0.0 <= value <= 100.0:
                raise HarnessError(f"{name} must be a percentage in [0, 100], got {value}")


@dataclass(frozen=True)
class GainRow:
    method: str
    encoder: str
    dataset_id: str
    gain_pp: float


# ---------------------------------------------------------------------------
# feature cache: flat float64 tensors on disk plus a JSON index

class FeatureCache:
    """One record per (clip content, stage, encoder, f_m).

    Records live as raw little-endian float64 blobs (functionals then
    handcrafted features, row-major); ``index.json`` maps the record key to
    shapes and provenance. Safe for concurrent readers; writes are guarded
    by an in-process lock and the index is rewritten atomically.
    """

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._index_path = self.root / "index.json"
        self._lock = threading.Lock()
        if self._index_path.exists():
            payload = json.loads(self._index_path.read_text(encoding="utf-8"))
            if payload.get("cache_version") != CACHE_VERSION:
                raise HarnessError(f"unsupported cache version in {self._index_path}")
            self._index = payload["records"]
        else:
            self._index = {}

    @staticmethod
    def key(clip_sha: str, stage: str, encoder_name: str, f_m_hz: int) -> str:
        text = "|".join([clip_sha, stage, encoder_name, str(f_m_hz)])
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def get(self, key: str):
        entry = self._index.get(key)
        if entry is None:
            return None
        raw = (self.root / entry["file"]).read_bytes()
        f_shape = tuple(entry["functionals_shape"])
        h_shape = tuple(entry["handcrafted_shape"])
        split = 8 * int(np.prod(f_shape))
        functionals = np.frombuffer(raw[:split], dtype="<f8").reshape(f_shape)
        hand = np.frombuffer(raw[split:], dtype="<f8").reshape(h_shape)
        return functionals.copy(), hand.copy()

    def put(self, key: str, functionals: np.ndarray, hand: np.ndarray, meta: dict) -> None:
        blob = (np.ascontiguousarray(functionals, dtype="<f8").tobytes()
                + np.ascontiguousarray(hand, dtype="<f8").tobytes())
        with self._lock:
            (self.root / f"{key}.bin").write_bytes(blob)
            self._index[key] = {
                "file": f"{key}.bin",
                "functionals_shape": list(functionals.shape),
                "handcrafted_shape": list(hand.shape),
                **meta,
            }
            tmp = self._index_path.with_suffix(".json.tmp")
            tmp.write_text(
                json.dumps({"cache_version": CACHE_VERSION, "records": self._index}),
                encoding="utf-8",
            )
            tmp.replace(self._index_path)


# ---------------------------------------------------------------------------
# per-clip feature extraction

def _chunk_bounds(n: int, window: int):
    # non-overlapping windows; a short trailing remainder is kept
    starts = list(range(0, n, window))
    return [(s, min(s + window, n)) for s in starts]


def _clip_features(clip, stage: str, encoder: EncoderHandle, f_m_hz: int,
                   window_s: float | None):
    """Raw (unstandardized) band functionals (B, D) and handcrafted (B, 2)."""
    if stage == "MB":
        bands = decompose(clip, f_m_hz)
        functionals = np.stack([pool_functional(encode(b, encoder), b.band_index).vector
                                for b in bands])
        hand = np.stack([handcrafted(b).as_array() for b in bands])
        return functionals, hand
    if stage == "BB":
        band = to_baseband(clip, f_m_hz)
        vec = pool_functional(encode(band, encoder)).vector
        hand = handcrafted(band).as_array()
        return vec[None], hand[None]
    if stage == "TE":
        band = time_expand(clip, f_m_hz)
        limit = encoder.max_input_seconds or window_s
        if limit is None:
            vec = pool_functional(encode(band, encoder)).vector
        else:
            window = max(int(round(limit * band.sample_rate_hz)), 1)
            vecs = [
                pool_functional_from(encoder, band.samples[a:b], band.sample_rate_hz)
                for a, b in _chunk_bounds(band.samples.size, window)
            ]
            vec = np.mean(vecs, axis=0)
        hand = handcrafted(band).as_array()
        return vec[None], hand[None]
    raise HarnessError(f"unknown stage {stage!r}")


def pool_functional_from(encoder: EncoderHandle, samples: np.ndarray, rate_hz: int) -> np.ndarray:
    return encoder.encode(samples, rate_hz).frames.mean(axis=0)


def _make_encoder(spec: ExperimentSpec) -> EncoderHandle:
    if spec.encoder == "builtin":
        return LogMelEncoder(sample_rate_hz=spec.f_m_hz)
    return ExternalEncoder(spec.encoder, sample_rate_hz=spec.f_m_hz)


def _extract_all(manifest: DatasetManifest, stage: str, encoder: EncoderHandle,
                 spec: ExperimentSpec, cache: FeatureCache) -> dict:
    """Features for every manifest entry, through the cache. Keyed by clip path."""

    def one(entry):
        clip_bytes = Path(entry.clip_path).read_bytes()
        clip_sha = hashlib.sha256(clip_bytes).hexdigest()
        key = FeatureCache.key(clip_sha, stage, encoder.name, spec.f_m_hz)
        hit = cache.get(key)
        if hit is not None:
            return entry.clip_path, hit
        clip = load_clip(entry.clip_path)
        functionals, hand = _clip_features(clip, stage, encoder, spec.f_m_hz,
                                           spec.encoder_window_s)
        cache.put(key, functionals, hand, {
            "clip": str(entry.clip_path), "stage": stage,
            "encoder": encoder.name, "f_m_hz": spec.f_m_hz,
        })
        return entry.clip_path, (functionals, hand)

    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(one, manifest.entries))
    else:
        results = [one(entry) for entry in manifest.entries]
    return dict(results)


def _prepare_stage(manifest: DatasetManifest, stage: str, encoder: EncoderHandle,
                   spec: ExperimentSpec, cache: FeatureCache) -> dict:
    """Standardized BandFeatureSets per split.

    Z-scoring statistics are fitted per (band, dim) on the Train split only
    and applied everywhere; handcrafted features stay raw.
    """
    features = _extract_all(manifest, stage, encoder, spec, cache)
    train_stack = np.stack([features[e.clip_path][0]
                            for e in manifest.split_entries("train")])
    standardizer = FunctionalStandardizer.fit(train_stack)
    splits: dict[str, list[BandFeatureSet]] = {}
    for split in ("train", "val", "test"):
        sets = []
        for entry in manifest.split_entries(split):
            functionals, hand = features[entry.clip_path]
            sets.append(BandFeatureSet(
                functionals=standardizer.transform(functionals),
                handcrafted=hand,
                label=manifest.label_index(entry.label),
            ))
        splits[split] = sets
    return splits


# ---------------------------------------------------------------------------
# experiment driver

def _accuracy_pct(model: FusionModel, sets) -> float:
    labels = np.asarray([s.label for s in sets])
    pred = predict_batch(model, sets)
    return float((pred == labels).mean() * 100.0)


def run_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """Train and score every requested method; returns one row per method.

    A failure in one method is recorded in ``report.json`` and does not
    abort the others. Rows land in ``results.csv``, fusion checkpoints in
    ``fusion_<method>.json`` under the output directory.
    """
    manifest = load_manifest(spec.manifest_path)
    dataset_id = Path(spec.manifest_path).stem
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cache = FeatureCache(spec.cache_dir if spec.cache_dir else out / "cache")
    encoder = _make_encoder(spec)

    if not manifest.split_entries("train"):
        raise HarnessError("manifest has no train clips")
    if not manifest.split_entries("test"):
        raise HarnessError("manifest has no test clips")

    rows: list[ResultRow] = []
    errors: dict[str, str] = {}
    stage_splits: dict[str, dict] = {}
    for method in spec.methods:
        started = time.perf_counter()
        try:
            stage = _STAGE[method]
            if stage not in stage_splits:
                stage_splits[stage] = _prepare_stage(manifest, stage, encoder, spec, cache)
            splits = stage_splits[stage]
            band_count = splits["train"][0].functionals.shape[0]
            config = FusionConfig(
                strategy=method if method in _FUSION_METHODS else "MP",
                band_count=band_count,
                dim=splits["train"][0].functionals.shape[1],
                class_count=manifest.class_count,
                seed=spec.seed,
                epochs=spec.epochs,
                learning_rate=spec.learning_rate,
                batch_size=spec.batch_size,
                momentum=spec.momentum,
                gate_hidden=spec.gate_hidden,
                attn_heads=spec.attn_heads,
            )
            model = train(config, splits["train"], splits["val"])
            val_acc = _accuracy_pct(model, splits["val"]) if splits["val"] else 0.0
            test_acc = _accuracy_pct(model, splits["test"])
            save_model(model, out / f"fusion_{method}.json")
            rows.append(ResultRow(
                method=method,
                encoder=encoder.name,
                dataset_id=dataset_id,
                test_accuracy=test_acc,
                val_accuracy=val_acc,
                wall_time_s=time.perf_counter() - started,
            ))
        except Exception as exc:  # noqa: BLE001 - per-method isolation is the contract
            errors[method] = f"{type(exc).__name__}: {exc}"

    write_results_csv(rows, out / "results.csv")
    report = {
        "report_version": REPORT_VERSION,
        "dataset": dataset_id,
        "encoder": encoder.name,
        "f_m_hz": spec.f_m_hz,
        "seed": spec.seed,
        "rows": [asdict(r) for r in rows],
        "errors": errors,
    }
    (out / "report.json").write_text(json.dumps(report, indent=1), encoding="utf-8")
    return rows


def gain_over_baseband(rows) -> list[GainRow]:
    """Accuracy delta of each method against the BB row, in percentage points."""
    reference = {(r.encoder, r.dataset_id): r.test_accuracy for r in rows if r.method == "BB"}
    gains = []
    for row in rows:
        if row.method == "BB":
            continue
        key = (row.encoder, row.dataset_id)
        if key not in reference:
            raise HarnessError(
                f"no BB reference row for encoder={row.encoder!r} dataset={row.dataset_id!r}"
            )
        gains.append(GainRow(row.method, row.encoder, row.dataset_id,
                             row.test_accuracy - reference[key]))
    return gains


def write_results_csv(rows, path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "encoder", "dataset", "test_accuracy",
                         "val_accuracy", "wall_time_s"])
        for r in rows:
            writer.writerow([r.method, r.encoder, r.dataset_id,
                             f"{r.test_accuracy:.4f}", f"{r.val_accuracy:.4f}",
                             f"{r.wall_time_s:.3f}"])


def write_gain_csv(gains, path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "encoder", "dataset", "gain_pp"])
        for g in gains:
            writer.writerow([g.method, g.encoder, g.dataset_id, f"{g.gain_pp:.4f}"])
