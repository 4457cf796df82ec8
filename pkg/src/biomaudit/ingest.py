"""Loading and joining of manifests, keypoints, predictions and images."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    DecodeError,
    DuplicateId,
    DuplicatePair,
    EmptyJoin,
    MissingFile,
    ParseError,
    UnknownSample,
    UnsupportedFormat,
    WrongArity,
)

log = logging.getLogger(__name__)

KEYPOINT_NAMES = (
    "nose",
    "left_eye",
    "right_eye",
    "left_ear",
    "right_ear",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hip",
    "right_hip",
    "left_knee",
    "right_knee",
    "left_ankle",
    "right_ankle",
)
KP_INDEX = {name: i for i, name in enumerate(KEYPOINT_NAMES)}

SPLITS = ("train", "val", "test")
MANIFEST_HEADER = ("sample_id", "path", "dataset", "split", "gender_gt")
PREDICTION_HEADER = ("model_id", "sample_id", "gender_pred")


@dataclass(frozen=True)
class ImageRecord:
    sample_id: str
    path: Path
    dataset: str
    split: str
    gender_gt: int  # 0 = female, 1 = male


@dataclass(frozen=True, eq=False)
class KeypointSet:
    """17 COCO keypoints as a read-only ``(17, 3)`` array of ``(x, y, conf)``."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=float)
        if arr.shape != (17, 3):
            raise WrongArity(f"expected (17, 3) keypoints, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ParseError("non-finite keypoint value")
        if np.any(arr[:, 2] < 0) or np.any(arr[:, 2] > 1):
            raise ParseError("keypoint confidence outside [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_flat(cls, values: Iterable[float]) -> "KeypointSet":
        arr = np.asarray(list(values), dtype=float)
        if arr.size != 51:
            raise WrongArity(f"expected 51 numbers, got {arr.size}")
        return cls(arr.reshape(17, 3))

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[KP_INDEX[name]]

    @property
    def x(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.data[:, 1]

    @property
    def conf(self) -> np.ndarray:
        return self.data[:, 2]

    def __eq__(self, other):
        return isinstance(other, KeypointSet) and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash(self.data.tobytes())


class KeypointMap(dict):
    """``sample_id -> KeypointSet`` with a count of clamped confidences."""

    n_clamped: int = 0


@dataclass(frozen=True)
class PredictionTable:
    rows: tuple[tuple[str, str, int], ...]

    @property
    def model_ids(self) -> list[str]:
        return sorted({m for m, _, _ in self.rows})

    @property
    def sample_ids(self) -> set[str]:
        return {s for _, s, _ in self.rows}

    def by_sample(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for model_id, sample_id, pred in self.rows:
            out.setdefault(sample_id, {})[model_id] = pred
        return out

    def by_model(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for model_id, sample_id, pred in self.rows:
            out.setdefault(model_id, {})[sample_id] = pred
        return out


@dataclass(frozen=True, eq=False)
class PixelBuffer:
    """8-bit RGB image stored row-major as ``(height, width, 3)``."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"expected (H, W, 3) pixels, got shape {px.shape}")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def channels(self) -> int:
        return 3


@dataclass(frozen=True)
class SampleRow:
    record: ImageRecord
    keypoints: KeypointSet | None
    predictions: Mapping[str, int] | None

    @property
    def sample_id(self) -> str:
        return self.record.sample_id


@dataclass
class JoinResult:
    rows: list[SampleRow]
    dropped: dict[str, int] = field(default_factory=dict)


def _require(path: Path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    return path


def _read_csv(path: Path, header: tuple[str, ...]) -> list[dict[str, str]]:
    with open(_require(path), newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError("missing header row", row=0)
        missing = [h for h in header if h not in reader.fieldnames]
        if missing:
            raise ParseError(f"header lacks columns {missing}", row=0)
        return list(reader)


def _binary(value: str, column: str, row: int) -> int:
    if value is None or value.strip() not in ("0", "1"):
        raise ParseError(f"{column} must be 0 or 1, got {value!r}", row=row)
    return int(value)


def load_manifest(path) -> list[ImageRecord]:
    """Parse a ``sample_id,path,dataset,split,gender_gt`` CSV.

    Relative image paths are resolved against the manifest's directory. Row
    numbers in errors count the header as row 0.
    """
    path = Path(path)
    records, seen = [], set()
    for i, row in enumerate(_read_csv(path, MANIFEST_HEADER), start=1):
        sid = (row["sample_id"] or "").strip()
        img = (row["path"] or "").strip()
        if not sid:
            raise ParseError("empty sample_id", row=i)
        if not img:
            raise ParseError("empty path", row=i)
        split = (row["split"] or "").strip()
        if split not in SPLITS:
            raise ParseError(f"split must be one of {SPLITS}, got {split!r}", row=i)
        if sid in seen:
            raise DuplicateId(sid)
        seen.add(sid)
        img_path = Path(img)
        if not img_path.is_absolute():
            img_path = path.parent / img_path
        records.append(
            ImageRecord(sid, img_path, (row["dataset"] or "").strip(), split, _binary(row["gender_gt"], "gender_gt", i))
        )
    return records


def load_keypoints(path) -> KeypointMap:
    """Parse an Alphapose-style JSON list of ``{"image_id", "keypoints", "score"}``.

    Confidences outside [0, 1] are clamped and counted in ``n_clamped``.
    """
    path = _require(Path(path))
    try:
        entries = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(entries, list):
        raise ParseError("keypoint file must hold a JSON array")
    out = KeypointMap()
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "image_id" not in entry or "keypoints" not in entry:
            raise ParseError("entry needs image_id and keypoints", row=i)
        sid = str(entry["image_id"])
        vec = entry["keypoints"]
        if not isinstance(vec, list) or len(vec) != 51:
            n = len(vec) if isinstance(vec, list) else "non-list"
            raise WrongArity(f"entry {i} ({sid!r}): expected 51 numbers, got {n}")
        try:
            arr = np.array([float(v) for v in vec]).reshape(17, 3)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"non-numeric keypoint value: {exc}", row=i) from exc
        if not np.all(np.isfinite(arr)):
            raise ParseError("non-finite keypoint value", row=i)
        conf = arr[:, 2]
        bad = int(np.count_nonzero((conf < 0) | (conf > 1)))
        if bad:
            out.n_clamped += bad
            arr[:, 2] = np.clip(conf, 0.0, 1.0)
        if sid in out:
            raise DuplicateId(sid)
        out[sid] = KeypointSet(arr)
    if out.n_clamped:
        log.warning("clamped %d keypoint confidences into [0, 1] (%s)", out.n_clamped, path)
    return out


def load_predictions(path) -> PredictionTable:
    rows, seen = [], set()
    for i, row in enumerate(_read_csv(Path(path), PREDICTION_HEADER), start=1):
        model_id = (row["model_id"] or "").strip()
        sid = (row["sample_id"] or "").strip()
        if not model_id or not sid:
            raise ParseError("empty model_id or sample_id", row=i)
        pred = _binary(row["gender_pred"], "gender_pred", i)
        if (model_id, sid) in seen:
            raise DuplicatePair(model_id, sid)
        seen.add((model_id, sid))
        rows.append((model_id, sid, pred))
    return PredictionTable(tuple(rows))


_MAGIC = {b"\x89PNG\r\n\x1a\n": "PNG", b"\xff\xd8\xff": "JPEG"}


def decode_image(path) -> PixelBuffer:
    path = _require(Path(path))
    with open(path, "rb") as fh:
        head = fh.read(8)
    if not any(head.startswith(m) for m in _MAGIC):
        raise UnsupportedFormat(f"{path}: not a PNG or JPEG file")
    try:
        with Image.open(path) as im:
            im.load()
            rgb = im.convert("RGB")
    except (OSError, UnidentifiedImageError, SyntaxError) as exc:
        raise DecodeError(f"{path}: {exc}") from exc
    return PixelBuffer(np.asarray(rgb, dtype=np.uint8))


def join_records(manifest, keypoints=None, predictions=None, *, strict=False) -> JoinResult:
    """Inner join on ``sample_id``; rows come back sorted by id.

    ``dropped`` counts manifest samples lost per source, plus ``unknown_*``
    entries for ids a source holds that the manifest lacks. A sample is kept
    for predictions only if every model predicted it. With ``strict`` an
    unknown id raises :class:`UnknownSample`.
    """
    by_id = {r.sample_id: r for r in manifest}
    keep = set(by_id)
    dropped: dict[str, int] = {}

    if keypoints is not None:
        kp_ids = set(keypoints)
        dropped["keypoints"] = len(keep - kp_ids)
        dropped["unknown_keypoints"] = len(kp_ids - set(by_id))
        keep &= kp_ids
    per_sample = None
    if predictions is not None:
        per_sample = predictions.by_sample()
        n_models = len(predictions.model_ids)
        complete = {s for s, p in per_sample.items() if len(p) == n_models}
        dropped["predictions"] = len(keep - complete)
        dropped["unknown_predictions"] = len(set(per_sample) - set(by_id))
        keep &= complete

    if strict:
        for src in ("unknown_keypoints", "unknown_predictions"):
            if dropped.get(src):
                raise UnknownSample(f"{dropped[src]} ids in {src.split('_')[1]} absent from manifest")
    if not keep:
        raise EmptyJoin("no sample_id is shared by all sources")
    for src, n in dropped.items():
        if n:
            log.info("join dropped %d samples (%s)", n, src)

    rows = [
        SampleRow(
            by_id[sid],
            keypoints[sid] if keypoints is not None else None,
            dict(sorted(per_sample[sid].items())) if per_sample is not None else None,
        )
        for sid in sorted(keep)
    ]
    return JoinResult(rows, dropped)
