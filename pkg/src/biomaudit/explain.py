"""Exact interventional Shapley attributions and their summaries.

The coalition value of a feature subset S for a row x is the mean model
output over background rows b with x's values written into the columns of
S. Attributions come from full subset enumeration, so the feature count is
capped at ``MAX_FEATURES``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import factorial
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import EmptyBackground, MissingTier, TooManyFeatures, UnknownFeature
from .subjfeat import FEATURES
from .trees import TreeEnsemble

MAX_FEATURES = 20
DEFAULT_BACKGROUND_CAP = 512


@dataclass(frozen=True, eq=False)
class ShapleyExplanation:
    sample_id: str
    phi: np.ndarray
    base: float
    x: np.ndarray | None = None

    @property
    def output(self) -> float:
        return float(self.base + self.phi.sum())

    def to_json(self, names: Sequence[str] = FEATURES) -> str:
        return json.dumps(
            {
                "base": float(self.base),
                "phi": {n: float(p) for n, p in zip(names, self.phi)},
                "sample_id": self.sample_id,
            }
        )

    @classmethod
    def from_json(cls, line: str, names: Sequence[str] = FEATURES) -> "ShapleyExplanation":
        obj = json.loads(line)
        return cls(obj["sample_id"], np.array([obj["phi"][n] for n in names], dtype=float), float(obj["base"]))


def _check(n_features: int, background) -> np.ndarray:
    if not 1 <= n_features <= MAX_FEATURES:
        raise TooManyFeatures(f"exact enumeration supports 1..{MAX_FEATURES} features, got {n_features}")
    bg = np.atleast_2d(np.asarray(background, dtype=float))
    if bg.size == 0 or len(bg) == 0:
        raise EmptyBackground("background set is empty")
    if bg.shape[1] != n_features:
        raise ValueError(f"background has {bg.shape[1]} columns, expected {n_features}")
    return bg


def _masks(n: int):
    masks = np.arange(1 << n)
    bits = (masks[:, None] >> np.arange(n)) & 1
    return masks, bits.astype(bool)


def shapley_from_values(v: np.ndarray) -> np.ndarray:
    """Shapley values from coalition values indexed by bitmask.

    ``v`` has shape ``(2**n,)`` or ``(k, 2**n)``; bit j of the mask set
    means feature j is in the coalition.
    """
    v = np.asarray(v, dtype=float)
    n = int(v.shape[-1]).bit_length() - 1
    masks, bits = _masks(n)
    sizes = bits.sum(1)
    w = np.array([factorial(s) * factorial(n - s - 1) / factorial(n) if s < n else 0.0 for s in range(n + 1)])
    phi = np.empty(v.shape[:-1] + (n,))
    for i in range(n):
        without = masks[~bits[:, i]]
        phi[..., i] = ((v[..., without | (1 << i)] - v[..., without]) * w[sizes[without]]).sum(-1)
    return phi


def coalition_values(f: Callable, x, background) -> np.ndarray:
    """Interventional coalition values for every subset, by direct model evaluation."""
    x = np.asarray(x, dtype=float)
    bg = _check(len(x), background)
    _, bits = _masks(len(x))
    composite = np.where(bits[:, None, :], x[None, None, :], bg[None, :, :])
    out = np.asarray(f(composite.reshape(-1, len(x))), dtype=float)
    return out.reshape(len(bits), len(bg)).mean(1)


def tree_coalition_values(model: TreeEnsemble, X, background) -> np.ndarray:
    """Coalition values for many rows at once, shape ``(len(X), 2**n)``.

    Uses the leaf boxes of the ensemble: a leaf contributes its value times
    the indicator that x satisfies its bounds on S times the fraction of
    background rows satisfying its bounds on the complement of S.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = model.n_features
    bg = _check(n, background)
    lo, hi, val = model.leaf_table()
    in_x = (X[:, None, :] > lo) & (X[:, None, :] <= hi)  # (rows, leaves, n)
    in_bg = (bg[:, None, :] > lo) & (bg[:, None, :] <= hi)  # (bg, leaves, n)
    masks, bits = _masks(n)
    v = np.empty((len(X), len(masks)))
    for m in masks:
        S = bits[m]
        from_x = in_x[:, :, S].all(2)
        from_bg = in_bg[:, :, ~S].all(2).mean(0)
        v[:, m] = model.init + from_x @ (val * from_bg)
    return v


def shapley_exact(f, x, background, sample_id: str = "") -> ShapleyExplanation:
    """Exact Shapley attribution of ``f(x)`` against ``background``.

    ``f`` is a TreeEnsemble or any callable mapping an ``(m, n)`` array to
    ``m`` outputs.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(f, TreeEnsemble):
        v = tree_coalition_values(f, x[None, :], background)[0]
    else:
        v = coalition_values(f, x, background)
    return ShapleyExplanation(sample_id, shapley_from_values(v), float(v[0]), x)


def explain_rows(model: TreeEnsemble, X, sample_ids: Sequence[str], background) -> list[ShapleyExplanation]:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    v = tree_coalition_values(model, X, background)
    phi = shapley_from_values(v)
    return [ShapleyExplanation(sid, phi[k], float(v[k, 0]), X[k]) for k, sid in enumerate(sample_ids)]


def select_background(X, cap: int = DEFAULT_BACKGROUND_CAP, seed: int = 0) -> np.ndarray:
    """The full matrix, or a seeded subsample of ``cap`` rows kept in input order."""
    X = np.asarray(X, dtype=float)
    if len(X) == 0:
        raise EmptyBackground("no rows to draw a background from")
    if len(X) <= cap:
        return X
    idx = np.sort(np.random.default_rng(seed).choice(len(X), size=cap, replace=False))
    return X[idx]


def pearson(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    da, db = a - a.mean(), b - b.mean()
    denom = np.sqrt((da * da).sum() * (db * db).sum())
    if denom == 0:
        return 0.0
    return float((da * db).sum() / denom)


@dataclass(frozen=True)
class RankedFeature:
    feature: str
    mean_abs_phi: float
    direction: str  # positive | negative | neutral


_NEUTRAL_R = 1e-12


def _direction(r: float) -> str:
    if r > _NEUTRAL_R:
        return "positive"
    if r < -_NEUTRAL_R:
        return "negative"
    return "neutral"


def mean_abs_shap(explanations: Sequence[ShapleyExplanation], names: Sequence[str] = FEATURES) -> list[RankedFeature]:
    """Features ranked by mean |phi|; direction is the sign of corr(value, phi)."""
    if not explanations:
        return []
    phi = np.array([e.phi for e in explanations])
    vals = np.array([e.x for e in explanations], dtype=float)
    ranked = [
        RankedFeature(names[j], float(np.abs(phi[:, j]).mean()), _direction(pearson(vals[:, j], phi[:, j])))
        for j in range(phi.shape[1])
    ]
    return sorted(ranked, key=lambda r: -r.mean_abs_phi)


def _feature_index(name: str, names: Sequence[str]) -> int:
    try:
        return list(names).index(name)
    except ValueError:
        raise UnknownFeature(f"{name!r} is not one of {list(names)}") from None


def default_interaction(explanations, feature: str, names: Sequence[str] = FEATURES) -> str:
    """Other feature whose values correlate most (in |r|) with ``feature``'s phi."""
    j = _feature_index(feature, names)
    if not explanations:
        return feature
    phi = np.array([e.phi[j] for e in explanations])
    vals = np.array([e.x for e in explanations], dtype=float)
    best, best_r = feature, 0.0
    for k, name in enumerate(names):
        if k == j:
            continue
        r = abs(pearson(vals[:, k], phi))
        if r > best_r:
            best, best_r = name, r
    return best


def dependence_data(explanations, feature: str, interaction: str | None = None, names: Sequence[str] = FEATURES):
    """``(value, phi, interaction value)`` per sample, ordered by sample_id."""
    j = _feature_index(feature, names)
    if interaction is None:
        interaction = default_interaction(explanations, feature, names)
    k = _feature_index(interaction, names)
    return [(float(e.x[j]), float(e.phi[j]), float(e.x[k])) for e in sorted(explanations, key=lambda e: e.sample_id)]


def group_by_tier(explanations, sample_dataset: Mapping[str, str], tiers: Mapping[str, str]):
    groups: dict[str, list[ShapleyExplanation]] = {}
    for e in explanations:
        dataset = sample_dataset.get(e.sample_id)
        if dataset not in tiers:
            raise MissingTier(f"no tier for dataset {dataset!r} (sample {e.sample_id!r})")
        groups.setdefault(tiers[dataset], []).append(e)
    return groups


TIER_ORDER = ("low", "medium", "high")


def per_quality_shap(groups: Mapping[str, Sequence[ShapleyExplanation]], names: Sequence[str] = FEATURES):
    """``{feature: {tier: mean |phi|}}`` with tiers in low/medium/high order."""
    order = [t for t in TIER_ORDER if t in groups] + sorted(t for t in groups if t not in TIER_ORDER)
    table = {name: {} for name in names}
    for tier in order:
        expl = groups[tier]
        if not expl:
            raise MissingTier(f"tier {tier!r} has no explanations")
        m = np.abs(np.array([e.phi for e in expl])).mean(0)
        for name, value in zip(names, m):
            table[name][tier] = float(value)
    return table
