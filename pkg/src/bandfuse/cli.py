"""Command-line front end.

Subcommands:
  decompose     split one clip into per-band WAV files at the model rate
  encode        extract and cache band functionals for a whole manifest
  train-fusion  train fusion checkpoints on cached or fresh features
  analyze       band-similarity and class-separation CSVs (Train split)
  evaluate      full run: train every method, score Test, emit gain table

Experiment settings come from a versioned JSON config file (see
``--config``) mirroring ExperimentSpec; any individual flag overrides the
file. Exit codes: 0 success, 1 invalid input or configuration, 2 runtime
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from bandfuse import analysis, fusion, harness
from bandfuse.bands import decompose as decompose_bands
from bandfuse.harness import ExperimentSpec, FeatureCache, HarnessError, METHODS
from bandfuse.signal_io import load_clip, load_manifest, save_wav

CONFIG_VERSION = 1

_SPEC_FIELDS = {f.name for f in dataclasses.fields(ExperimentSpec)}


def _load_config(path: str) -> dict:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise HarnessError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise HarnessError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise HarnessError(f"config file {path} must hold a JSON object")
    version = payload.pop("config_version", None)
    if version != CONFIG_VERSION:
        raise HarnessError(
            f"config file {path} has config_version={version!r}, expected {CONFIG_VERSION}"
        )
    unknown = sorted(set(payload) - _SPEC_FIELDS)
    if unknown:
        raise HarnessError(f"config file {path} has unknown keys: {unknown}")
    return payload


def _add_spec_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="versioned JSON config mirroring the experiment spec")
    parser.add_argument("--manifest", dest="manifest_path", help="dataset manifest CSV")
    parser.add_argument("--output-dir", dest="output_dir")
    parser.add_argument("--methods", help="comma-separated subset of " + ",".join(METHODS))
    parser.add_argument("--encoder", help='"builtin" or an external host:port endpoint')
    parser.add_argument("--model-rate", dest="f_m_hz", type=int,
                        help="encoder input rate f_m in Hz")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--learning-rate", dest="learning_rate", type=float)
    parser.add_argument("--batch-size", dest="batch_size", type=int)
    parser.add_argument("--momentum", type=float)
    parser.add_argument("--gate-hidden", dest="gate_hidden", type=int)
    parser.add_argument("--attn-heads", dest="attn_heads", type=int)
    parser.add_argument("--encoder-window-s", dest="encoder_window_s", type=float)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--cache-dir", dest="cache_dir")


def _spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    settings: dict = {}
    if args.config:
        settings.update(_load_config(args.config))
    for name in _SPEC_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            settings[name] = value
    if isinstance(settings.get("methods"), str):
        settings["methods"] = tuple(m.strip() for m in settings["methods"].split(",") if m.strip())
    missing = [k for k in ("manifest_path", "output_dir") if not settings.get(k)]
    if missing:
        raise HarnessError(f"missing required settings: {missing} (flag or config file)")
    return ExperimentSpec(**settings)


# ---------------------------------------------------------------------------
# subcommands

def _cmd_decompose(args) -> int:
    clip = load_clip(args.clip)
    out_dir = Path(args.out_dir) if args.out_dir else Path(args.clip).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.clip).stem
    bands = decompose_bands(clip, args.model_rate)
    for band in bands:
        path = out_dir / f"{stem}_band{band.band_index}.wav"
        save_wav(path, band.samples, band.sample_rate_hz)
        print(f"band {band.band_index}: {path}")
    print(f"wrote {len(bands)} band files at {args.model_rate} Hz")
    return 0


def _stages_for(methods) -> list[str]:
    stages = []
    for method in methods:
        stage = harness._STAGE[method]
        if stage not in stages:
            stages.append(stage)
    return stages


def _cmd_encode(args) -> int:
    spec = _spec_from_args(args)
    manifest = load_manifest(spec.manifest_path)
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cache = FeatureCache(spec.cache_dir if spec.cache_dir else out / "cache")
    encoder = harness._make_encoder(spec)
    for stage in _stages_for(spec.methods):
        features = harness._extract_all(manifest, stage, encoder, spec, cache)
        print(f"stage {stage}: {len(features)} clips cached in {cache.root}")
    return 0


def _cmd_train_fusion(args) -> int:
    spec = _spec_from_args(args)
    manifest = load_manifest(spec.manifest_path)
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cache = FeatureCache(spec.cache_dir if spec.cache_dir else out / "cache")
    encoder = harness._make_encoder(spec)
    stage_splits: dict[str, dict] = {}
    for method in spec.methods:
        stage = harness._STAGE[method]
        if stage not in stage_splits:
            stage_splits[stage] = harness._prepare_stage(manifest, stage, encoder, spec, cache)
        splits = stage_splits[stage]
        sample = splits["train"][0]
        config = fusion.FusionConfig(
            strategy=method if method in harness._FUSION_METHODS else "MP",
            band_count=sample.functionals.shape[0],
            dim=sample.functionals.shape[1],
            class_count=manifest.class_count,
            seed=spec.seed,
            epochs=spec.epochs,
            learning_rate=spec.learning_rate,
            batch_size=spec.batch_size,
            momentum=spec.momentum,
            gate_hidden=spec.gate_hidden,
            attn_heads=spec.attn_heads,
        )
        model = fusion.train(config, splits["train"], splits["val"])
        path = out / f"fusion_{method}.json"
        fusion.save_model(model, path)
        val_acc = harness._accuracy_pct(model, splits["val"]) if splits["val"] else float("nan")
        print(f"{method}: checkpoint {path} (val accuracy {val_acc:.2f}%)")
    return 0


def _cmd_analyze(args) -> int:
    spec = _spec_from_args(args)
    manifest = load_manifest(spec.manifest_path)
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    cache = FeatureCache(spec.cache_dir if spec.cache_dir else out / "cache")
    encoder = harness._make_encoder(spec)

    # band similarity always comes from the multi-band decomposition
    mb_splits = harness._prepare_stage(manifest, "MB", encoder, spec, cache)
    train_sets = mb_splits["train"]
    similarity = analysis.band_similarity(train_sets)
    analysis.write_band_similarity_csv(similarity, out / "band_similarity.csv")
    print(f"band_similarity.csv: {similarity.sample_count} train clips, "
          f"{similarity.per_band_mean_cosine.size} bands")

    separations: dict[str, analysis.SeparationReport] = {}
    stage_splits: dict[str, dict] = {"MB": mb_splits}
    for method in spec.methods:
        stage = harness._STAGE[method]
        if stage not in stage_splits:
            stage_splits[stage] = harness._prepare_stage(manifest, stage, encoder, spec, cache)
        splits = stage_splits[stage]
        sets = splits["train"]
        labels = [s.label for s in sets]
        if method in harness._FUSION_METHODS:
            sample = sets[0]
            config = fusion.FusionConfig(
                strategy=method,
                band_count=sample.functionals.shape[0],
                dim=sample.functionals.shape[1],
                class_count=manifest.class_count,
                seed=spec.seed,
                epochs=spec.epochs,
                learning_rate=spec.learning_rate,
                batch_size=spec.batch_size,
                momentum=spec.momentum,
                gate_hidden=spec.gate_hidden,
                attn_heads=spec.attn_heads,
            )
            model = fusion.train(config, sets, splits["val"])
            vectors = np.stack([fusion.fused_functional(model, s).vector for s in sets])
        else:
            vectors = np.stack([s.functionals[0] for s in sets])
        separations[method] = analysis.class_separation(vectors, labels)
    analysis.write_class_separation_csv(separations, out / "class_separation.csv")
    for method, report in separations.items():
        print(f"{method}: intra {report.intra:+.4f}  inter {report.inter:+.4f}  "
              f"separation {report.separation:+.4f}")
    return 0


def _cmd_evaluate(args) -> int:
    spec = _spec_from_args(args)
    rows = harness.run_experiment(spec)
    out = Path(spec.output_dir)
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    for row in rows:
        print(f"{row.method:4s} test {row.test_accuracy:6.2f}%  val {row.val_accuracy:6.2f}%  "
              f"({row.wall_time_s:.1f}s)")
    for method, message in report.get("errors", {}).items():
        print(f"{method}: FAILED - {message}", file=sys.stderr)
    if any(r.method == "BB" for r in rows):
        gains = harness.gain_over_baseband(rows)
        harness.write_gain_csv(gains, out / "gain.csv")
        for gain in gains:
            print(f"{gain.method:4s} gain over BB {gain.gain_pp:+.2f} pp")
    if report.get("errors"):
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bandfuse",
        description="multi-band heterodyne encoding and fusion for full-spectrum audio",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="split a clip into per-band WAVs")
    p.add_argument("clip", help="input WAV file")
    p.add_argument("--model-rate", type=int, default=16000, help="model rate f_m in Hz")
    p.add_argument("--out-dir", help="directory for band WAVs (default: next to the clip)")
    p.set_defaults(func=_cmd_decompose)

    for name, func, help_text in (
        ("encode", _cmd_encode, "extract and cache functionals for a manifest"),
        ("train-fusion", _cmd_train_fusion, "train fusion checkpoints"),
        ("analyze", _cmd_analyze, "band-similarity and class-separation CSVs"),
        ("evaluate", _cmd_evaluate, "train, score Test, and emit the gain table"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_spec_flags(p)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
