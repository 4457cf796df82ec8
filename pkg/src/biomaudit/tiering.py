"""Pooled normalization of image features and dataset quality tiers."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConstantPool

log = logging.getLogger(__name__)

IMAGE_FEATURES = ("resolution", "luminosity", "blurriness")
TIERS = ("low", "medium", "high")


def normalize_pooled(groups: Mapping[str, Sequence[float]], mode: str = "minmax") -> dict[str, np.ndarray]:
    """Normalize each dataset's values with statistics of the pooled union.

    ``minmax`` maps the pooled range onto [0, 1]; ``zscore`` centers on the
    pooled mean with unit population std.
    """
    arrays = {k: np.asarray(v, dtype=float) for k, v in groups.items()}
    pool = np.concatenate([a for a in arrays.values()]) if arrays else np.empty(0)
    if pool.size == 0:
        raise ConstantPool("no values to normalize")
    if mode == "minmax":
        lo, hi = pool.min(), pool.max()
        if hi == lo:
            raise ConstantPool(f"all pooled values equal {lo}")
        return {k: (a - lo) / (hi - lo) for k, a in arrays.items()}
    if mode == "zscore":
        mu, sd = pool.mean(), pool.std()
        if sd == 0:
            raise ConstantPool(f"all pooled values equal {mu}")
        return {k: (a - mu) / sd for k, a in arrays.items()}
    raise ValueError(f"unknown normalization {mode!r}")


@dataclass(frozen=True)
class FeatureStat:
    mean: float
    std: float
    n: int


DatasetStats = dict  # dataset -> feature -> FeatureStat


def dataset_stats(table: Mapping[str, Mapping[str, Sequence[float]]]) -> DatasetStats:
    """Mean and population std per dataset and feature.

    ``table`` maps dataset -> feature -> already-normalized values.
    """
    out: DatasetStats = {}
    for dataset in sorted(table):
        out[dataset] = {}
        for feature, values in table[dataset].items():
            a = np.asarray(values, dtype=float)
            if a.size == 0:
                raise ValueError(f"dataset {dataset!r} has no {feature} values")
            out[dataset][feature] = FeatureStat(float(a.mean()), float(a.std()), int(a.size))
    return out


def pooled_stats(raw: Mapping[str, Mapping[str, Sequence[float]]], mode: str = "minmax",
                 features: Sequence[str] = IMAGE_FEATURES) -> DatasetStats:
    """Normalize each feature over the pooled datasets, then summarize."""
    normalized: dict[str, dict[str, np.ndarray]] = {d: {} for d in raw}
    for feature in features:
        for dataset, values in normalize_pooled({d: raw[d][feature] for d in raw}, mode).items():
            normalized[dataset][feature] = values
    return dataset_stats(normalized)


def quality_score(stats: DatasetStats, dataset: str) -> float:
    return stats[dataset]["resolution"].mean - stats[dataset]["blurriness"].mean


def assign_tiers(stats: DatasetStats) -> dict[str, str]:
    """Rank datasets by mean resolution minus mean blurriness, ascending.

    Three datasets map to low/medium/high; other counts spread over the
    same scale by rank (two datasets -> low, high). Equal scores are broken
    by lower mean blurriness ranking higher, then by name.
    """
    names = sorted(stats)
    if not names:
        return {}
    key = {d: (quality_score(stats, d), -stats[d]["blurriness"].mean, d) for d in names}
    scores = [key[d][0] for d in names]
    if len(set(scores)) < len(scores):
        log.warning("TieBreak: equal quality scores among %s; lower blurriness wins", names)
    ranked = sorted(names, key=lambda d: key[d])
    k = len(ranked)
    if k == 1:
        return {ranked[0]: "medium"}
    return {d: TIERS[int(round(2 * r / (k - 1)))] for r, d in enumerate(ranked)}
