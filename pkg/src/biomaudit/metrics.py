"""Meta-label fusion, label-based mean accuracy, face importance and the
correct-vs-all feature comparison."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateBaseline, EmptyClass, EmptySelection, NoPredictions
from .subjfeat import FEATURES, POSES, FeatureRow

RANDOM_MA = 50.0


def meta_label(preds: Mapping[str, int] | Sequence[int], gt: int) -> int:
    """1 iff every model's prediction equals the ground truth."""
    values = list(preds.values()) if isinstance(preds, Mapping) else list(preds)
    if not values:
        raise NoPredictions("meta label needs at least one model prediction")
    return int(all(p == gt for p in values))


@dataclass(frozen=True)
class ConfusionCounts:
    """Per-attribute positives/negatives and their correctly predicted counts."""

    P: tuple[int, ...]
    TP: tuple[int, ...]
    N: tuple[int, ...]
    TN: tuple[int, ...]

    def __post_init__(self):
        if not (len(self.P) == len(self.TP) == len(self.N) == len(self.TN)):
            raise ValueError("count vectors must share one length")
        for p, tp, n, tn in zip(self.P, self.TP, self.N, self.TN):
            if not (0 <= tp <= p and 0 <= tn <= n):
                raise ValueError(f"invalid counts P={p} TP={tp} N={n} TN={tn}")

    @property
    def n_attributes(self) -> int:
        return len(self.P)

    @classmethod
    def from_labels(cls, y_true, y_pred) -> "ConfusionCounts":
        """Counts from ``(n_examples,)`` or ``(n_examples, n_attributes)`` 0/1 arrays."""
        t = np.asarray(y_true, dtype=int)
        p = np.asarray(y_pred, dtype=int)
        if t.shape != p.shape:
            raise ValueError("y_true and y_pred shapes differ")
        if t.ndim == 1:
            t, p = t[:, None], p[:, None]
        pos = t == 1
        return cls(
            tuple(int(v) for v in pos.sum(0)),
            tuple(int(v) for v in (pos & (p == 1)).sum(0)),
            tuple(int(v) for v in (~pos).sum(0)),
            tuple(int(v) for v in (~pos & (p == 0)).sum(0)),
        )


def mean_accuracy(counts: ConfusionCounts) -> float:
    """mA in percent, averaged over attributes: 100/(2M) * sum(TP/P + TN/N)."""
    total = 0.0
    for i, (p, tp, n, tn) in enumerate(zip(counts.P, counts.TP, counts.N, counts.TN)):
        if p == 0 or n == 0:
            raise EmptyClass(f"attribute {i} has P={p}, N={n}; both classes must be present")
        total += tp / p + tn / n
    return 100.0 * total / (2 * counts.n_attributes)


@dataclass(frozen=True)
class FaceImportance:
    mA_f: float
    mA_max: float
    FI: float


def face_importance(mA_f: float, mA_max: float) -> float:
    """Face-only mA rescaled so 50 (chance) -> 0 and mA_max -> 100, clamped to [0, 100]."""
    if mA_max <= RANDOM_MA:
        raise DegenerateBaseline(f"mA_max must exceed {RANDOM_MA}, got {mA_max}")
    fi = 100.0 * (mA_f - RANDOM_MA) / (mA_max - RANDOM_MA)
    return min(max(fi, 0.0), 100.0)


@dataclass(frozen=True)
class FeatureComparison:
    feature: str
    correct_mean: float
    correct_std: float | None
    all_mean: float
    all_std: float | None


def compare_correct_vs_all(rows: Sequence[FeatureRow]) -> list[FeatureComparison]:
    """Mean and population std per numeric feature over correct rows and all rows.

    Pose is reported as one ``pose=<value>`` line per pose holding the
    fraction of rows with that pose (std left empty).
    """
    correct = [r for r in rows if r.meta_label == 1]
    if not correct:
        raise EmptySelection("no row has meta_label = 1")
    X_all = np.array([r.values for r in rows], dtype=float)
    X_ok = np.array([r.values for r in correct], dtype=float)

    report = []
    for j, name in enumerate(FEATURES[:-1]):
        report.append(
            FeatureComparison(
                name,
                float(X_ok[:, j].mean()),
                float(X_ok[:, j].std()),
                float(X_all[:, j].mean()),
                float(X_all[:, j].std()),
            )
        )
    for pose in POSES:
        frac_ok = sum(r.pose == pose for r in correct) / len(correct)
        frac_all = sum(r.pose == pose for r in rows) / len(rows)
        report.append(FeatureComparison(f"pose={pose}", frac_ok, None, frac_all, None))
    return report


def normalize_image_features(rows: Sequence[FeatureRow]) -> list[FeatureRow]:
    """Min-max scale the three image features within ``rows`` (constant column -> 0)."""
    if not rows:
        return []
    X = np.array([r.values for r in rows], dtype=float)
    for j in range(3):
        lo, hi = X[:, j].min(), X[:, j].max()
        X[:, j] = (X[:, j] - lo) / (hi - lo) if hi > lo else 0.0
    return [
        FeatureRow(r.sample_id, tuple(float(v) for v in x), r.pose, r.meta_label, r.dataset, r.split, r.gender_gt)
        for r, x in zip(rows, X)
    ]
