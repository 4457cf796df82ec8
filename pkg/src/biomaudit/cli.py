"""Command-line front end: ``biomaudit {features,explain,faces,metrics,tier,report}``.

Each command prints a JSON summary on stdout. Exit status is 0 on a clean
run, 1 when per-sample error records were produced, and 2 on a fatal error
(reported as ``{"error": <code>, "detail": ...}`` on stderr).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import explain as ex
from . import metrics as mt
from . import tiering
from .config import RunConfig, build_config, parse_config_file
from .errors import (
    AuditError,
    DegenerateGeometry,
    EmptySelection,
    MissingFile,
    MissingModel,
    MissingUpstream,
    WriteError,
)
from .headroi import FACE_MANIFEST_HEADER, crop_heads
from .imgfeat import image_features
from .ingest import decode_image, join_records, load_keypoints, load_manifest, load_predictions
from .report import (
    bar_chart_svg,
    fmt,
    read_csv,
    read_features,
    read_rankings,
    write_csv,
    write_features,
    write_json,
    write_rankings,
)
from .subjfeat import FEATURES, FeatureRow, build_feature_row, subject_features
from .trees import fit_surrogate

log = logging.getLogger("biomaudit")


def _need(path, name: str) -> Path:
    if path is None:
        raise MissingFile(f"--{name.replace('_', '-')} not given")
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    return path


def _out_dir(cfg: RunConfig) -> Path:
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise WriteError(f"cannot create {cfg.out}: {exc}") from exc
    return cfg.out


def _checked_predictions(cfg: RunConfig):
    preds = load_predictions(_need(cfg.predictions, "predictions"))
    missing = [m for m in cfg.models if m not in preds.model_ids]
    if missing:
        raise MissingModel(f"no predictions for model(s): {', '.join(missing)}")
    return preds


def _feature_rows_with_labels(cfg: RunConfig):
    rows = read_features(_need(cfg.features_csv, "features"))
    preds = _checked_predictions(cfg)
    by_sample = preds.by_sample()
    n_models = len(preds.model_ids)
    labeled, dropped = [], 0
    for r in rows:
        p = by_sample.get(r.sample_id)
        if p is None or len(p) != n_models:
            dropped += 1
            continue
        labeled.append(
            FeatureRow(r.sample_id, r.values, r.pose, mt.meta_label(p, r.gender_gt), r.dataset, r.split, r.gender_gt)
        )
    if not labeled:
        raise EmptySelection("no feature row has predictions from every model")
    return labeled, preds, dropped


def _tiers_from_rows(rows, norm: str):
    raw: dict[str, dict[str, list[float]]] = {}
    for r in rows:
        d = raw.setdefault(r.dataset, {f: [] for f in tiering.IMAGE_FEATURES})
        for j, f in enumerate(tiering.IMAGE_FEATURES):
            d[f].append(r.values[j])
    stats = tiering.pooled_stats(raw, norm)
    return stats, tiering.assign_tiers(stats)


def cmd_features(cfg: RunConfig) -> dict:
    manifest = load_manifest(_need(cfg.manifest, "manifest"))
    keypoints = load_keypoints(_need(cfg.keypoints, "keypoints"))
    joined = join_records(manifest, keypoints)
    out = _out_dir(cfg)

    rows, errors, degenerate = [], [], []
    for s in joined.rows:
        try:
            subj = subject_features(s.keypoints)
        except DegenerateGeometry:
            degenerate.append(s.sample_id)
            continue
        try:
            img = image_features(decode_image(s.record.path), cfg.lum_weights, cfg.kernel)
        except AuditError as exc:
            errors.append({"sample_id": s.sample_id, "error": exc.code, "detail": str(exc)})
            continue
        rows.append(build_feature_row(s.record, img, subj))

    write_features(out / "features.csv", rows)
    if errors:
        write_csv(out / "features_errors.csv", ("sample_id", "error", "detail"),
                  ((e["sample_id"], e["error"], e["detail"]) for e in errors))
    dropped = dict(joined.dropped, degenerate_pose=len(degenerate))
    return {
        "command": "features",
        "rows": len(rows),
        "dropped": dropped,
        "clamped_confidences": keypoints.n_clamped,
        "errors": errors,
    }


def cmd_explain(cfg: RunConfig) -> dict:
    rows, preds, dropped = _feature_rows_with_labels(cfg)
    out = _out_dir(cfg)
    X = np.array([r.values for r in rows], dtype=float)
    y = np.array([r.meta_label for r in rows], dtype=float)
    ids = [r.sample_id for r in rows]

    model = fit_surrogate(X, y, cfg.surrogate)
    background = ex.select_background(X, cfg.background_cap, cfg.seed)
    expl = ex.explain_rows(model, X, ids, background)

    worst = max(abs(e.output - f) for e, f in zip(expl, model.predict(X)))
    with open(out / "shap.jsonl", "w") as fh:
        for e in expl:
            fh.write(e.to_json() + "\n")

    ranking = ex.mean_abs_shap(expl)
    write_rankings(out / "rankings.csv", ranking)

    for feature in FEATURES:
        partner = cfg.interaction if cfg.interaction and cfg.interaction != feature else None
        partner = partner or ex.default_interaction(expl, feature)
        data = ex.dependence_data(expl, feature, partner)
        write_csv(
            out / f"dependence_{feature}.csv",
            ("sample_id", "value", "phi", "interaction_feature", "interaction_value"),
            ((sid, v, p, partner, iv) for sid, (v, p, iv) in zip(sorted(ids), data)),
        )

    _, tiers = _tiers_from_rows(rows, cfg.norm)
    table = ex.per_quality_shap(ex.group_by_tier(expl, {r.sample_id: r.dataset for r in rows}, tiers))
    tier_cols = list(next(iter(table.values())).keys())
    write_csv(out / "per_tier.csv", ("feature", *tier_cols), ((f, *table[f].values()) for f in FEATURES))

    return {
        "command": "explain",
        "samples": len(rows),
        "dropped_without_predictions": dropped,
        "models": preds.model_ids,
        "meta_label_rate": float(y.mean()),
        "train_loss": model.train_loss,
        "max_efficiency_error": float(worst),
        "top_features": [[r.feature, r.mean_abs_phi, r.direction] for r in ranking[:3]],
        "tiers": tiers,
    }


def cmd_faces(cfg: RunConfig) -> dict:
    manifest = load_manifest(_need(cfg.manifest, "manifest"))
    keypoints = load_keypoints(_need(cfg.keypoints, "keypoints"))
    poses = {r.sample_id: r.pose for r in read_features(_need(cfg.features_csv, "features"))}
    joined = join_records([r for r in manifest if r.sample_id in poses], keypoints)
    result = crop_heads(
        [(s.record, s.keypoints) for s in joined.rows], poses, cfg.out, lambda rec: decode_image(rec.path)
    )
    write_csv(cfg.out / "faces.csv", FACE_MANIFEST_HEADER, result.rows)
    if result.errors:
        write_csv(cfg.out / "faces_errors.csv", ("sample_id", "error", "detail"), result.errors)
    return {
        "command": "faces",
        "crops": len(result.rows),
        "skipped_non_frontal": len(result.skipped),
        "errors": [{"sample_id": s, "error": c, "detail": d} for s, c, d in result.errors],
        "warning": None if result.rows else "no frontal samples produced a face crop",
    }


def cmd_metrics(cfg: RunConfig) -> dict:
    rows, preds, dropped = _feature_rows_with_labels(cfg)
    out = _out_dir(cfg)
    gt = {r.sample_id: r.gender_gt for r in rows}
    ids = sorted(gt)

    mas = {}
    for model_id, pred in preds.by_model().items():
        counts = mt.ConfusionCounts.from_labels([gt[s] for s in ids], [pred[s] for s in ids])
        mas[model_id] = mt.mean_accuracy(counts)
    meta_acc = 100.0 * float(np.mean([r.meta_label for r in rows]))
    write_csv(
        out / "metrics.csv",
        ("metric", "name", "value"),
        [("mA", m, v) for m, v in sorted(mas.items())] + [("meta_accuracy", "all_models_correct", meta_acc)],
    )

    comparison = []
    by_dataset: dict[str, list] = {}
    for r in rows:
        by_dataset.setdefault(r.dataset, []).append(r)
    for dataset in sorted(by_dataset):
        normed = mt.normalize_image_features(by_dataset[dataset])
        try:
            report = mt.compare_correct_vs_all(normed)
        except EmptySelection:
            log.warning("dataset %s has no all-correct rows; comparison skipped", dataset)
            continue
        comparison += [(dataset, c.feature, c.correct_mean, c.correct_std, c.all_mean, c.all_std) for c in report]
    write_csv(
        out / "comparison.csv",
        ("dataset", "feature", "correct_mean", "correct_std", "all_mean", "all_std"),
        comparison,
    )

    fi_rows = []
    if cfg.face_eval is not None:
        for rec in read_csv(_need(cfg.face_eval, "face_eval"), ("dataset", "pose", "mA_f", "mA_max")):
            fi = mt.face_importance(float(rec["mA_f"]), float(rec["mA_max"]))
            fi_rows.append((rec["dataset"], rec["pose"], float(rec["mA_f"]), float(rec["mA_max"]), fi))
        write_csv(out / "fi.csv", ("dataset", "pose", "mA_f", "mA_max", "FI"), fi_rows)

    return {
        "command": "metrics",
        "mA": {m: round(v, 2) for m, v in sorted(mas.items())},
        "meta_accuracy": round(meta_acc, 2),
        "dropped_without_predictions": dropped,
        "FI": [[d, p, round(fi, 2)] for d, p, _, _, fi in fi_rows],
    }


def cmd_tier(cfg: RunConfig) -> dict:
    rows = read_features(_need(cfg.features_csv, "features"))
    out = _out_dir(cfg)
    stats, tiers = _tiers_from_rows(rows, cfg.norm)
    header = ["dataset"]
    for f in tiering.IMAGE_FEATURES:
        header += [f"{f}_mean", f"{f}_std"]
    body = []
    for d in sorted(stats):
        line = [d]
        for f in tiering.IMAGE_FEATURES:
            line += [stats[d][f].mean, stats[d][f].std]
        body.append(line + [tiers[d]])
    write_csv(out / "tiers.csv", header + ["tier"], body)
    return {"command": "tier", "tiers": tiers}


def cmd_report(cfg: RunConfig) -> dict:
    out = cfg.out
    rankings_path = out / "rankings.csv"
    if not rankings_path.is_file():
        raise MissingUpstream(f"{rankings_path} not found; run `explain` first")
    ranking = read_rankings(rankings_path)

    def optional(name):
        p = out / name
        return read_csv(p) if p.is_file() else None

    bundle = {
        "rankings": [{"feature": r.feature, "mean_abs_phi": r.mean_abs_phi, "direction": r.direction} for r in ranking],
        "stats_tiers": optional("tiers.csv"),
        "face_importance": optional("fi.csv"),
        "metrics": optional("metrics.csv"),
        "per_tier": optional("per_tier.csv"),
    }
    write_json(out / "report.json", bundle)
    (out / "shap_bar.svg").write_text(bar_chart_svg(ranking))
    return {"command": "report", "bars": len(ranking)}


COMMANDS = {
    "features": cmd_features,
    "explain": cmd_explain,
    "faces": cmd_faces,
    "metrics": cmd_metrics,
    "tier": cmd_tier,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file; flags override it")
    common.add_argument("--manifest")
    common.add_argument("--keypoints")
    common.add_argument("--predictions")
    common.add_argument("--features", help="features CSV (default: OUT/features.csv)")
    common.add_argument("--face-eval", dest="face_eval", help="CSV dataset,pose,mA_f,mA_max")
    common.add_argument("--out")
    common.add_argument("--seed", type=int)
    common.add_argument("--lum-weights", dest="lum_weights", metavar="R,G,B")
    common.add_argument("--kernel", choices=["4n", "8n"])
    common.add_argument("--mode", choices=["gbdt", "cart"])
    common.add_argument("--depth", type=int)
    common.add_argument("--trees", type=int)
    common.add_argument("--shrinkage", type=float)
    common.add_argument("--background-cap", dest="background_cap", type=int)
    common.add_argument("--interaction", metavar="FEATURE", choices=list(FEATURES))
    common.add_argument("--norm", choices=["minmax", "zscore"])
    common.add_argument("--models", help="comma-separated model ids that must be present")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="biomaudit", description="Gender-inference audit toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=fn.__doc__)
    return parser


_NOT_CONFIG = {"command", "config", "verbose"}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        cfg = build_config(file_values, {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG})
        summary = COMMANDS[args.command](cfg)
    except AuditError as exc:
        print(json.dumps({"error": exc.code, "detail": str(exc)}), file=sys.stderr)
        return 2
    print(json.dumps(summary, indent=2, default=fmt))
    return 1 if summary.get("errors") else 0


if __name__ == "__main__":
    sys.exit(main())
