"""Compare feature rankings from the boosted surrogate and a single CART tree
on the same features.csv / predictions.csv pair."""

import argparse
from pathlib import Path

import numpy as np

from biomaudit.explain import explain_rows, mean_abs_shap, select_background
from biomaudit.ingest import load_predictions
from biomaudit.metrics import meta_label
from biomaudit.report import read_features
from biomaudit.trees import SurrogateParams, fit_surrogate


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("features", type=Path)
    ap.add_argument("predictions", type=Path)
    ap.add_argument("--depths", default="2,3,4")
    args = ap.parse_args()

    preds = load_predictions(args.predictions).by_sample()
    rows = [r for r in read_features(args.features) if r.sample_id in preds]
    X = np.array([r.values for r in rows])
    y = np.array([meta_label(preds[r.sample_id], r.gender_gt) for r in rows], dtype=float)
    bg = select_background(X)
    ids = [r.sample_id for r in rows]

    for mode in ("gbdt", "cart"):
        for depth in (int(d) for d in args.depths.split(",")):
            model = fit_surrogate(X, y, SurrogateParams(mode=mode, depth=depth))
            ranking = mean_abs_shap(explain_rows(model, X, ids, bg))
            top = ", ".join(f"{r.feature}({r.direction[0]})" for r in ranking[:3])
            print(f"{mode:4s} depth={depth}  mse={model.train_loss:.4f}  top3: {top}")


if __name__ == "__main__":
    main()
