"""Command-line pipeline driver.

Stages communicate through files so any stage can be rerun in isolation:

    gasseg synth --out corpus/
    gasseg featurize corpus/
    gasseg train corpus/ --arch ae_grnn --out model.json
    gasseg segment model.json corpus/ --detector gas:update --sweep --out seg/
    gasseg evaluate corpus/ seg/boundaries.json --out results.csv
    gasseg plotdata --model model.json --corpus corpus/ --out plots/
    gasseg sweep-report --corpus corpus/ --model ae=model.json --out report.csv

Exit codes: 0 success, 1 usage or config error, 2 data error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import shutil
import sys
from pathlib import Path

import numpy as np

from . import __version__, corpus, evaluation, features, gas, kernels, models, segment
from .config import RunConfig, derive_seed
from .errors import ConfigError, DataError, NumericalError, TrainingDiverged
from .grnn import GateTag

FEATURES_DIRNAME = "features"
BOUNDARY_FILENAME = "boundaries.json"
PR_CURVE_FILENAME = "pr_curve.csv"

PR_COLUMNS = ("threshold", "precision", "recall", "f1", "os", "hr", "r_value")
METRIC_COLUMNS = ("n_ref", "n_hyp", "n_hit", "precision", "recall", "f1",
                  "hr", "os", "r_value")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# config plumbing


def _add_config_args(sub):
    sub.add_argument("--config", metavar="FILE",
                     help="run configuration JSON document")
    sub.add_argument("--set", metavar="KEY=VALUE", action="append",
                     default=[], dest="overrides",
                     help="override one config key, e.g. --set train.epochs=5 "
                          "(value parsed as JSON when possible)")
    sub.add_argument("--seed", type=int, default=None,
                     help="top-level seed (overrides the config document)")


def _parse_override(text):
    if "=" not in text:
        raise ConfigError(f"--set expects KEY=VALUE, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _resolve_config(args) -> RunConfig:
    data = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise DataError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must be a JSON object")
    for text in getattr(args, "overrides", []):
        key, value = _parse_override(text)
        parts = key.split(".")
        node = data
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"cannot override {key}: {part} is a value")
        node[parts[-1]] = value
    if getattr(args, "seed", None) is not None:
        data["seed"] = args.seed
    return RunConfig.from_dict(data)


def _write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _sidecar_meta(cfg: RunConfig, **extra):
    meta = {"tool_version": __version__, "kernel_backend": kernels.BACKEND,
            "config": cfg.to_dict()}
    meta.update(extra)
    return meta


# ---------------------------------------------------------------------------
# shared loading helpers


def _load_refs(manifest):
    """Reference boundaries (ms) and durations (ms) keyed by utterance id."""
    rate = manifest["sample_rate_hz"]
    refs, durations = {}, {}
    for utt in manifest["utterances"]:
        refs[utt["id"]] = segment.BoundarySet(
            times_ms=[s * 1000.0 / rate for s in utt["boundaries_samples"]],
            source="ground_truth")
        durations[utt["id"]] = utt["n_samples"] * 1000.0 / rate
    return refs, durations


def _features_dir(corpus_dir, args=None):
    override = getattr(args, "features_dir", None) if args else None
    return Path(override) if override else Path(corpus_dir) / FEATURES_DIRNAME


def _load_feature_cache(corpus_dir, manifest, args=None):
    feat_dir = _features_dir(corpus_dir, args)
    if not feat_dir.is_dir():
        raise DataError(
            f"no feature cache at {feat_dir}; run `gasseg featurize` first")
    out = {}
    for utt in manifest["utterances"]:
        path = feat_dir / (utt["id"] + ".feat")
        if not path.exists():
            raise DataError(f"missing feature cache entry {path}")
        out[utt["id"]], _ = features.load_features(path)
    return out


def _load_boundary_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read boundary file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise DataError(f"{path}: expected an object mapping id -> [times_ms]")
    return {utt_id: [float(t) for t in times] for utt_id, times in data.items()}


def _write_metrics_row(writer, result, **front):
    row = dict(front)
    for col in METRIC_COLUMNS:
        value = getattr(result, col)
        row[col] = f"{value:.6g}" if isinstance(value, float) else value
    writer.writerow(row)


# ---------------------------------------------------------------------------
# synth


def cmd_synth(args) -> int:
    cfg = _resolve_config(args)
    out_dir = Path(args.out)
    manifest = corpus.write_corpus(out_dir, cfg.corpus)
    _write_json(out_dir / "run_config.json", _sidecar_meta(cfg))
    n_bounds = sum(len(u["boundaries_samples"]) for u in manifest["utterances"])
    print(f"synthesized {len(manifest['utterances'])} utterances "
          f"({n_bounds} interior boundaries) in {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# featurize


def cmd_featurize(args) -> int:
    cfg = _resolve_config(args)
    corpus_dir = Path(args.corpus_dir)
    manifest = corpus.load_manifest(corpus_dir)
    feat_dir = _features_dir(corpus_dir, args)
    feat_dir.mkdir(parents=True, exist_ok=True)
    computed = skipped = repaired = 0
    for utt in manifest["utterances"]:
        wav_path = corpus_dir / utt["wav"]
        if not wav_path.exists():
            raise DataError(f"missing WAV {wav_path}")
        sha = features.sha256_of_file(wav_path)
        cache_path = feat_dir / (utt["id"] + ".feat")
        if cache_path.exists():
            try:
                _, header = features.load_features(cache_path)
                if (header.get("wav_sha256") == sha
                        and header["frame_shift_ms"] == cfg.features.frame_shift_ms
                        and header["frame_length_ms"] == cfg.features.frame_length_ms):
                    skipped += 1
                    continue
            except DataError:
                print(f"warning: corrupt cache entry {cache_path}; re-extracting",
                      file=sys.stderr)
                repaired += 1
        wave = corpus.read_wav(wav_path)
        feats = features.cmvn(features.mfcc39(
            wave, frame_shift_ms=cfg.features.frame_shift_ms,
            frame_length_ms=cfg.features.frame_length_ms))
        features.save_features(feats, cache_path, wav_sha256=sha)
        computed += 1
    _write_json(feat_dir / "features_meta.json", _sidecar_meta(cfg))
    print(f"featurized {computed} utterances ({skipped} cached, "
          f"{repaired} repaired) in {feat_dir}")
    return 0


# ---------------------------------------------------------------------------
# train


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    if args.arch:
        cfg.model.architecture = args.arch
    if args.cell:
        cfg.model.cell = args.cell
    cfg.model.__post_init__()  # revalidate after flag overrides
    corpus_dir = Path(args.corpus_dir)
    manifest = corpus.load_manifest(corpus_dir)
    feats = _load_feature_cache(corpus_dir, manifest, args)
    if args.epochs is not None:
        cfg.train.epochs = args.epochs

    model = models.build(cfg.model, seed=derive_seed(cfg.seed, "init"))
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    try:
        model, history = models.train(model, feats, cfg.train)
    except TrainingDiverged as exc:
        if exc.last_good_parameters is not None:
            from .grnn import set_parameters
            set_parameters(model.network, exc.last_good_parameters)
            rescue = out_path.with_suffix(".lastgood.json")
            models.save(model, rescue)
            print(f"training diverged; last finite parameters in {rescue}",
                  file=sys.stderr)
        raise

    models.save(model, out_path)
    _write_json(out_path.with_suffix(".meta.json"), _sidecar_meta(cfg))
    loss_csv = out_path.with_suffix(".loss.csv")
    with open(loss_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "mean_frame_loss"])
        for epoch, loss in enumerate(history, start=1):
            writer.writerow([epoch, f"{loss:.10g}"])
    last = f"{history[-1]:.5f}" if history else "n/a"
    print(f"trained {cfg.model.architecture} ({cfg.model.cell}) for "
          f"{cfg.train.epochs} epochs; final mean frame loss {last}; "
          f"checkpoint {out_path}")
    return 0


# ---------------------------------------------------------------------------
# segment


def _sweep_detector(model, feats, refs, durations, cfg, spec):
    """Run the threshold sweep (and weight sweep for bare 'interp')."""
    if spec.kind == "interp" and spec.weight is None:
        candidates = [segment.DetectorSpec(kind="interp", weight=w)
                      for w in cfg.segment.interp_weights]
    else:
        candidates = [spec]
    best = None
    curves = []
    for cand in candidates:
        signals = segment.corpus_signals(model, feats, cand)
        sweep = segment.threshold_sweep(
            signals, refs, thresholds=cfg.segment.thresholds,
            tolerance_ms=cfg.eval.tolerance_ms, durations_ms=durations,
            exclude_edges=cfg.eval.exclude_edges)
        curves.append((cand, sweep))
        if best is None or sweep.best_result.r_value > best[1].best_result.r_value:
            best = (cand, sweep)
    return best, curves


def cmd_segment(args) -> int:
    cfg = _resolve_config(args)
    detector_text = args.detector or cfg.segment.detector
    spec = segment.DetectorSpec.parse(detector_text)
    model = models.load(args.model)
    corpus_dir = Path(args.corpus_dir)
    manifest = corpus.load_manifest(corpus_dir)
    feats = _load_feature_cache(corpus_dir, manifest, args)
    refs, durations = _load_refs(manifest)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.threshold is not None:
        if spec.kind == "interp" and spec.weight is None:
            raise ConfigError("fixed-threshold mode needs interp:<weight>")
        signals = segment.corpus_signals(model, feats, spec)
        hyps = {utt_id: segment.peak_pick(sig, args.threshold)
                for utt_id, sig in signals.items()}
        chosen_threshold = args.threshold
        chosen_spec = spec
        sweep = None
    else:
        (chosen_spec, sweep), _curves = _sweep_detector(
            model, feats, refs, durations, cfg, spec)
        hyps = sweep.boundaries_at_best
        chosen_threshold = sweep.best_threshold
        with open(out_dir / PR_CURVE_FILENAME, "w", newline="",
                  encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=PR_COLUMNS)
            writer.writeheader()
            for threshold, result in sweep.rows():
                writer.writerow({
                    "threshold": f"{threshold:.10g}",
                    "precision": f"{result.precision:.6g}",
                    "recall": f"{result.recall:.6g}",
                    "f1": f"{result.f1:.6g}",
                    "os": f"{result.os:.6g}",
                    "hr": f"{result.hr:.6g}",
                    "r_value": f"{result.r_value:.6g}",
                })

    _write_json(out_dir / BOUNDARY_FILENAME,
                {utt_id: sorted(b.times_ms) for utt_id, b in hyps.items()})
    meta = _sidecar_meta(cfg, detector=str(chosen_spec),
                         threshold=chosen_threshold,
                         model=str(args.model), corpus=str(corpus_dir))
    if sweep is not None:
        meta["best_r_value"] = sweep.best_result.r_value
    _write_json(out_dir / "boundaries.meta.json", meta)
    n = sum(len(b.times_ms) for b in hyps.values())
    mode = "sweep" if sweep is not None else f"threshold {chosen_threshold}"
    print(f"detector {chosen_spec} ({mode}): {n} boundaries -> {out_dir}")
    if sweep is not None:
        print(f"best threshold {chosen_threshold:.6g} with "
              f"R-value {sweep.best_result.r_value:.2f}")
    return 0


# ---------------------------------------------------------------------------
# evaluate


def cmd_evaluate(args) -> int:
    cfg = _resolve_config(args)
    corpus_dir = Path(args.corpus_dir)
    manifest = corpus.load_manifest(corpus_dir)
    refs, durations = _load_refs(manifest)
    hyp_times = _load_boundary_file(args.boundaries)
    if set(hyp_times) != set(refs):
        missing = sorted(set(refs) ^ set(hyp_times))
        raise DataError(f"utterance ids differ between manifest and "
                        f"boundary file: {missing[:5]}")
    result = evaluation.evaluate_corpus(
        refs, hyp_times, tolerance_ms=cfg.eval.tolerance_ms,
        durations_ms=durations, exclude_edges=cfg.eval.exclude_edges)

    meta_path = Path(args.boundaries).with_suffix(".meta.json")
    label, condition = args.label, args.condition
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        label = label or meta.get("detector", "")
        condition = condition or meta.get("condition", "clean")
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=("model", "condition") + METRIC_COLUMNS)
        writer.writeheader()
        _write_metrics_row(writer, result, model=label or "",
                           condition=condition or "clean")
    _write_json(out_path.with_suffix(".meta.json"), _sidecar_meta(cfg))
    print(f"P {result.precision:.4f}  R {result.recall:.4f}  "
          f"F1 {result.f1:.4f}  R-value {result.r_value:.2f} -> {out_path}")
    return 0


# ---------------------------------------------------------------------------
# plotdata


def _dump_signal_csv(path, signal, per_column=None, prefix="unit"):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["frame_index", "signal_value"]
        if per_column is not None:
            header += [f"{prefix}_{j:02d}" for j in range(per_column.shape[1])]
        writer.writerow(header)
        for t, value in enumerate(signal.values):
            row = [t, f"{value:.10g}"]
            if per_column is not None:
                row += [f"{v:.10g}" for v in per_column[t]]
            writer.writerow(row)


def cmd_plotdata(args) -> int:
    cfg = _resolve_config(args)
    model = models.load(args.model)
    corpus_dir = Path(args.corpus_dir)
    manifest = corpus.load_manifest(corpus_dir)
    feats = _load_feature_cache(corpus_dir, manifest, args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    utt_id = args.utterance or manifest["utterances"][0]["id"]
    if utt_id not in feats:
        raise DataError(f"unknown utterance id {utt_id!r}")
    utt_feats = feats[utt_id]

    # gate activation traces, mean + per unit
    forward = (models.rpm_forward if model.config.is_predictor
               else models.ae_forward)
    _, traces = forward(model, utt_feats, capture=model.gate_tags)
    for trace in traces:
        if trace.layer_index != 0:
            continue
        series = gas.mean_gas(trace)
        path = out_dir / f"gas_trace_{utt_id}_{trace.gate.short}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            n_units = series.per_unit.shape[1]
            writer.writerow(["frame_index", "mean"]
                            + [f"unit_{j:02d}" for j in range(n_units)])
            for t in range(series.n_frames):
                writer.writerow([t, f"{series.mean_values[t]:.10g}"]
                                + [f"{v:.10g}" for v in series.per_unit[t]])

    # detector signal with its per-unit / per-dimension decomposition
    spec = segment.DetectorSpec.parse(args.detector or cfg.segment.detector)
    if spec.kind == "interp" and spec.weight is None:
        spec = segment.DetectorSpec(kind="interp",
                                    weight=cfg.segment.interp_weights[-1])
    signal = segment.detector_signal(model, utt_feats, spec)
    per_column = None
    prefix = "unit"
    if spec.kind == "gas":
        tag = GateTag.from_short(model.config.cell, spec.gate)
        _, traces = forward(model, utt_feats, capture={tag})
        per_column = gas.diff_gas_per_unit(traces[0])
    elif spec.kind == "rpm":
        predictions, _ = models.rpm_forward(model, utt_feats)
        _, per_column = gas.rpm_error_signal(predictions, utt_feats.frames)
        prefix = "dim"
    _dump_signal_csv(out_dir / f"signal_{utt_id}_{spec.kind}.csv",
                     signal, per_column, prefix)

    # reference (and optional hypothesis) boundaries for vertical markers
    refs, _durations = _load_refs(manifest)
    with open(out_dir / f"boundaries_{utt_id}.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_ms", "source"])
        for t in refs[utt_id].times_ms:
            writer.writerow([f"{t:.10g}", "ground_truth"])
        for seg_dir in args.segments or []:
            hyp = _load_boundary_file(Path(seg_dir) / BOUNDARY_FILENAME)
            name = Path(seg_dir).name
            for t in hyp.get(utt_id, []):
                writer.writerow([f"{t:.10g}", name])

    # pass threshold curves through for PR plots
    for seg_dir in args.segments or []:
        src = Path(seg_dir) / PR_CURVE_FILENAME
        if src.exists():
            shutil.copyfile(src, out_dir / f"pr_curve_{Path(seg_dir).name}.csv")

    _write_json(out_dir / "plotdata.meta.json", _sidecar_meta(cfg))
    print(f"plot data for {utt_id} -> {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# sweep-report


def _hac_sweep(feats, refs, durations, cfg):
    """Sweep mean-segment-length targets for the agglomerative baseline."""
    best = None
    for frames_per_segment in range(2, 41):
        hyps = {}
        for utt_id, fs in feats.items():
            t = fs.n_frames
            target = max(0, min(t - 1, int(round(t / frames_per_segment)) - 1))
            hyps[utt_id] = segment.hac_segment(fs, target_boundary_count=target)
        result = evaluation.evaluate_corpus(
            refs, hyps, tolerance_ms=cfg.eval.tolerance_ms,
            durations_ms=durations, exclude_edges=cfg.eval.exclude_edges)
        if best is None or result.r_value > best[1].r_value:
            best = (frames_per_segment, result)
    return best


def _report_rows_for_corpus(condition, corpus_dir, named_models, cfg, args):
    manifest = corpus.load_manifest(corpus_dir)
    feats = _load_feature_cache(corpus_dir, manifest)
    refs, durations = _load_refs(manifest)
    rows = []

    def add(model_label, detector_label, result, extra=""):
        rows.append((model_label, detector_label, condition, extra, result))

    for label, model in named_models:
        if args.table == "gates":
            for tag in sorted(model.gate_tags, key=lambda t: t.value):
                spec = segment.DetectorSpec(kind="gas", gate=tag.short)
                (chosen, sweep), _ = _sweep_detector(
                    model, feats, refs, durations, cfg, spec)
                add(label, str(chosen), sweep.best_result,
                    f"threshold={sweep.best_threshold:.6g}")
            continue
        specs = []
        if model.config.is_predictor:
            specs.append(segment.DetectorSpec(kind="rpm"))
            specs.append(segment.DetectorSpec(kind="interp", weight=None))
        else:
            gate = "update" if model.config.cell == "gru" else "forget"
            specs.append(segment.DetectorSpec(kind="gas", gate=gate))
        for spec in specs:
            (chosen, sweep), _ = _sweep_detector(
                model, feats, refs, durations, cfg, spec)
            add(label, str(chosen), sweep.best_result,
                f"threshold={sweep.best_threshold:.6g}")

    if args.table == "approaches":
        hac_best = _hac_sweep(feats, refs, durations, cfg)
        add("hac", "hac", hac_best[1],
            f"frames_per_segment={hac_best[0]}")
        hyps = {utt_id: segment.periodic_boundaries(args.periodic_ms,
                                                    durations[utt_id])
                for utt_id in refs}
        periodic = evaluation.evaluate_corpus(
            refs, hyps, tolerance_ms=cfg.eval.tolerance_ms,
            durations_ms=durations, exclude_edges=cfg.eval.exclude_edges)
        add("periodic", f"every {args.periodic_ms:g} ms", periodic)
    return rows


def cmd_sweep_report(args) -> int:
    cfg = _resolve_config(args)
    named_models = []
    for item in args.models or []:
        if "=" not in item:
            raise ConfigError(f"--model expects NAME=PATH, got {item!r}")
        name, path = item.split("=", 1)
        named_models.append((name, models.load(path)))
    if not named_models and args.table == "gates":
        raise ConfigError("gates table needs at least one --model")

    rows = _report_rows_for_corpus("clean", Path(args.corpus_dir),
                                   named_models, cfg, args)
    if args.noisy_corpus:
        rows += _report_rows_for_corpus("noisy", Path(args.noisy_corpus),
                                        named_models, cfg, args)

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=("model", "detector", "condition", "operating_point")
            + METRIC_COLUMNS)
        writer.writeheader()
        for model_label, detector_label, condition, extra, result in rows:
            _write_metrics_row(writer, result, model=model_label,
                               detector=detector_label, condition=condition,
                               operating_point=extra)
    _write_json(out_path.with_suffix(".meta.json"), _sidecar_meta(cfg))
    for model_label, detector_label, condition, _extra, result in rows:
        print(f"{model_label:>10s} {detector_label:>14s} {condition:>6s} "
              f"R-value {result.r_value:6.2f}")
    print(f"report -> {out_path}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gasseg",
                     description="gate-activation-signal phoneme segmentation")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("synth", help="synthesize a corpus with known boundaries")
    p.add_argument("--out", required=True, help="corpus output directory")
    _add_config_args(p)
    p.set_defaults(func=cmd_synth)

    p = subs.add_parser("featurize", help="extract and cache features")
    p.add_argument("corpus_dir")
    p.add_argument("--features-dir", default=None)
    _add_config_args(p)
    p.set_defaults(func=cmd_featurize)

    p = subs.add_parser("train", help="train a model on cached features")
    p.add_argument("corpus_dir")
    p.add_argument("--out", required=True, help="checkpoint path (JSON)")
    p.add_argument("--arch", choices=models.ARCHITECTURES, default=None)
    p.add_argument("--cell", choices=("lstm", "gru"), default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--features-dir", default=None)
    _add_config_args(p)
    p.set_defaults(func=cmd_train)

    p = subs.add_parser("segment", help="detect boundaries with a trained model")
    p.add_argument("model")
    p.add_argument("corpus_dir")
    p.add_argument("--detector", default=None,
                   help="gas:<gate> | rpm | interp:<w> | interp (sweep w)")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--threshold", type=float, default=None)
    group.add_argument("--sweep", action="store_true", default=False,
                       help="sweep thresholds (default)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--features-dir", default=None)
    _add_config_args(p)
    p.set_defaults(func=cmd_segment)

    p = subs.add_parser("evaluate", help="score boundaries against a manifest")
    p.add_argument("corpus_dir")
    p.add_argument("boundaries", help="boundary JSON file")
    p.add_argument("--out", required=True, help="results CSV path")
    p.add_argument("--label", default=None, help="model column value")
    p.add_argument("--condition", default=None, help="condition column value")
    _add_config_args(p)
    p.set_defaults(func=cmd_evaluate)

    p = subs.add_parser("plotdata", help="emit CSVs for plotting")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus-dir", required=True)
    p.add_argument("--utterance", default=None)
    p.add_argument("--detector", default=None)
    p.add_argument("--segments", action="append", default=[],
                   help="segmentation output directory (repeatable)")
    p.add_argument("--out", required=True)
    p.add_argument("--features-dir", default=None)
    _add_config_args(p)
    p.set_defaults(func=cmd_plotdata)

    p = subs.add_parser("sweep-report",
                        help="best-threshold R-value table across detectors")
    p.add_argument("--corpus-dir", required=True, dest="corpus_dir")
    p.add_argument("--noisy-corpus", default=None)
    p.add_argument("--model", action="append", default=[], dest="models",
                   metavar="NAME=PATH")
    p.add_argument("--table", choices=("approaches", "gates"),
                   default="approaches")
    p.add_argument("--periodic-ms", type=float, default=80.0)
    p.add_argument("--out", required=True)
    _add_config_args(p)
    p.set_defaults(func=cmd_sweep_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (TrainingDiverged, NumericalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
