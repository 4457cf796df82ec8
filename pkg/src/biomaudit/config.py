"""Run configuration: a flat ``key=value`` file overridden by CLI flags."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError, MissingFile
from .imgfeat import KERNELS, LUMA_WEIGHTS
from .trees import SurrogateParams

SEED_ENV = "BIOMAUDIT_SEED"


@dataclass
class RunConfig:
    manifest: Path | None = None
    keypoints: Path | None = None
    predictions: Path | None = None
    features: Path | None = None
    face_eval: Path | None = None
    out: Path = Path("out")
    seed: int = 0
    lum_weights: tuple[float, float, float] = LUMA_WEIGHTS
    kernel: str = "4n"
    mode: str = "gbdt"
    depth: int = 3
    trees: int = 100
    shrinkage: float = 0.1
    background_cap: int = 512
    interaction: str | None = None
    norm: str = "minmax"
    models: tuple[str, ...] = field(default_factory=tuple)

    @property
    def features_csv(self) -> Path:
        return self.features if self.features is not None else self.out / "features.csv"

    @property
    def surrogate(self) -> SurrogateParams:
        return SurrogateParams(mode=self.mode, depth=self.depth, trees=self.trees, shrinkage=self.shrinkage, seed=self.seed)


_PATHS = {"manifest", "keypoints", "predictions", "features", "face_eval", "out"}


def _coerce(key: str, value):
    if value is None:
        return None
    if key in _PATHS:
        return Path(value)
    try:
        if key in ("seed", "depth", "trees", "background_cap"):
            return int(value)
        if key == "shrinkage":
            return float(value)
        if key == "lum_weights":
            parts = [float(v) for v in str(value).split(",")] if isinstance(value, str) else [float(v) for v in value]
            if len(parts) != 3:
                raise ValueError("need three comma-separated weights")
            return tuple(parts)
        if key == "models":
            items = value.split(",") if isinstance(value, str) else value
            return tuple(m.strip() for m in items if m.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from exc
    if key == "kernel" and value not in KERNELS:
        raise ConfigError(f"kernel must be one of {sorted(KERNELS)}")
    if key == "norm" and value not in ("minmax", "zscore"):
        raise ConfigError("norm must be minmax or zscore")
    if key == "mode" and value not in ("gbdt", "cart"):
        raise ConfigError("mode must be gbdt or cart")
    return value


def parse_config_file(path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    out = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def build_config(file_values: dict | None = None, overrides: dict | None = None, env=None) -> RunConfig:
    """Merge defaults, environment seed, config file and flags (later wins)."""
    env = os.environ if env is None else env
    known = {f.name for f in fields(RunConfig)}
    merged: dict = {}
    if env.get(SEED_ENV):
        merged["seed"] = env[SEED_ENV]
    for source in (file_values or {}, {k: v for k, v in (overrides or {}).items() if v is not None}):
        for key, value in source.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = value
    return RunConfig(**{k: _coerce(k, v) for k, v in merged.items()})
