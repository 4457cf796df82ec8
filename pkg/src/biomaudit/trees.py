"""Regression-tree surrogate: gradient boosting on squared loss, or a single CART."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import TooFewSamples

log = logging.getLogger(__name__)

MIN_SAMPLES = 10
_MIN_GAIN = 1e-12


@dataclass(frozen=True)
class SurrogateParams:
    mode: str = "gbdt"  # "gbdt" or "cart"
    depth: int = 3
    trees: int = 100
    shrinkage: float = 0.1
    min_samples_leaf: int = 1
    subsample: float = 1.0
    seed: int = 0


@dataclass
class Tree:
    """Flat node arrays; ``feature[i] == -1`` marks a leaf. Rows with
    ``x[feature] <= threshold`` go left."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def depth(self) -> int:
        def walk(i):
            if self.feature[i] < 0:
                return 0
            return 1 + max(walk(self.left[i]), walk(self.right[i]))

        return walk(0)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        node = np.zeros(len(X), dtype=int)
        active = self.feature[node] >= 0
        while active.any():
            idx = np.nonzero(active)[0]
            nd = node[idx]
            go_left = X[idx, self.feature[nd]] <= self.threshold[nd]
            node[idx] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return self.value[node]

    def leaf_boxes(self, n_features: int):
        """Each leaf as ``(lo, hi, value)``: a row reaches the leaf iff
        ``lo < x <= hi`` componentwise."""
        out = []
        stack = [(0, np.full(n_features, -np.inf), np.full(n_features, np.inf))]
        while stack:
            i, lo, hi = stack.pop()
            f = self.feature[i]
            if f < 0:
                out.append((lo, hi, float(self.value[i])))
                continue
            t = self.threshold[i]
            lhi = hi.copy()
            lhi[f] = min(hi[f], t)
            rlo = lo.copy()
            rlo[f] = max(lo[f], t)
            stack.append((self.right[i], rlo, hi))
            stack.append((self.left[i], lo, lhi))
        return out


@dataclass
class TreeEnsemble:
    trees: list[Tree]
    n_features: int
    init: float = 0.0
    shrinkage: float = 1.0
    train_loss: float | None = None
    params: SurrogateParams = field(default_factory=SurrogateParams)

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.full(len(X), self.init)
        for t in self.trees:
            out += self.shrinkage * t.predict(X)
        return out

    __call__ = predict

    def used_features(self) -> set[int]:
        return {int(f) for t in self.trees for f in t.feature if f >= 0}

    def leaf_table(self):
        """All leaves across trees as stacked ``(lo, hi, value)`` arrays, values
        already scaled by the shrinkage. Prediction is ``init`` plus the sum of
        values of the leaves whose box contains the row."""
        boxes = [b for t in self.trees for b in t.leaf_boxes(self.n_features)]
        lo = np.array([b[0] for b in boxes]).reshape(-1, self.n_features)
        hi = np.array([b[1] for b in boxes]).reshape(-1, self.n_features)
        val = self.shrinkage * np.array([b[2] for b in boxes])
        return lo, hi, val


def best_split(X: np.ndarray, r: np.ndarray, min_leaf: int = 1):
    """Squared-error-optimal split of ``(X, r)``: ``(gain, feature, threshold)``
    or None. Ties keep the lowest feature, then the lowest threshold."""
    n = len(r)
    total = r.sum()
    base = total * total / n
    best = None
    for j in range(X.shape[1]):
        order = np.argsort(X[:, j], kind="stable")
        xs, rs = X[order, j], r[order]
        csum = np.cumsum(rs)[:-1]
        n_left = np.arange(1, n)
        ok = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & (n - n_left >= min_leaf)
        if not ok.any():
            continue
        gain = csum**2 / n_left + (total - csum) ** 2 / (n - n_left) - base
        gain = np.where(ok, gain, -np.inf)
        k = int(np.argmax(gain))
        if best is None or gain[k] > best[0]:
            thr = (xs[k] + xs[k + 1]) / 2
            if not xs[k] <= thr < xs[k + 1]:
                thr = xs[k]
            best = (float(gain[k]), j, float(thr))
    if best is None or best[0] <= _MIN_GAIN:
        return None
    return best


def fit_tree(X: np.ndarray, r: np.ndarray, max_depth: int, min_leaf: int = 1) -> Tree:
    feature, threshold, left, right, value = [], [], [], [], []

    def grow(idx, depth):
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(r[idx].mean()))
        if depth >= max_depth or len(idx) < 2 * min_leaf:
            return node
        split = best_split(X[idx], r[idx], min_leaf)
        if split is None:
            return node
        _, j, thr = split
        mask = X[idx, j] <= thr
        feature[node], threshold[node] = j, thr
        left[node] = grow(idx[mask], depth + 1)
        right[node] = grow(idx[~mask], depth + 1)
        return node

    grow(np.arange(len(r)), 0)
    return Tree(
        np.array(feature, dtype=int),
        np.array(threshold, dtype=float),
        np.array(left, dtype=int),
        np.array(right, dtype=int),
        np.array(value, dtype=float),
    )


def constant_ensemble(value: float, n_features: int, params: SurrogateParams | None = None) -> TreeEnsemble:
    leaf = Tree(np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]), np.array([float(value)]))
    return TreeEnsemble([leaf], n_features, 0.0, 1.0, 0.0, params or SurrogateParams())


def fit_surrogate(X, y, params: SurrogateParams | None = None) -> TreeEnsemble:
    """Fit the surrogate mapping feature rows to 0/1 meta-labels.

    Deterministic for fixed inputs and ``params``; the seed only matters
    when ``subsample < 1``.
    """
    params = params or SurrogateParams()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-D with one row per label")
    if len(y) < MIN_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_SAMPLES} rows, got {len(y)}")
    n_features = X.shape[1]

    if np.all(y == y[0]):
        log.warning("ConstantLabels: all %d labels equal %g; returning constant tree", len(y), y[0])
        return constant_ensemble(y[0], n_features, params)

    if params.mode == "cart":
        tree = fit_tree(X, y, params.depth, params.min_samples_leaf)
        model = TreeEnsemble([tree], n_features, 0.0, 1.0, params=params)
    elif params.mode == "gbdt":
        rng = np.random.default_rng(params.seed)
        init = float(y.mean())
        pred = np.full(len(y), init)
        trees = []
        for _ in range(params.trees):
            resid = y - pred
            if params.subsample < 1.0:
                m = max(1, int(round(params.subsample * len(y))))
                idx = np.sort(rng.choice(len(y), size=m, replace=False))
            else:
                idx = slice(None)
            tree = fit_tree(X[idx], resid[idx], params.depth, params.min_samples_leaf)
            trees.append(tree)
            pred = pred + params.shrinkage * tree.predict(X)
        model = TreeEnsemble(trees, n_features, init, params.shrinkage, params=params)
    else:
        raise ValueError(f"unknown surrogate mode {params.mode!r}")

    model.train_loss = float(np.mean((model.predict(X) - y) ** 2))
    return model
