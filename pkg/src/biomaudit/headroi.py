"""Head ROI from ear keypoints and face-crop export for frontal subjects."""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import AuditError, DegenerateBox, WriteError
from .ingest import KeypointSet, PixelBuffer

log = logging.getLogger(__name__)

HEAD_FRACTION = Fraction(2, 9)
FACE_MANIFEST_HEADER = ("sample_id", "face_path", "gender_gt")


@dataclass(frozen=True)
class HeadBox:
    center: tuple[float, float]
    side: float
    top_left: tuple[float, float]
    bottom_right: tuple[float, float]

    def pixel_bounds(self) -> tuple[int, int, int, int]:
        """``(x0, y0, x1, y1)``, exclusive ends: every pixel the box touches."""
        x0, y0 = (math.floor(v) for v in self.top_left)
        x1, y1 = (math.ceil(v) for v in self.bottom_right)
        return x0, y0, x1, y1


def head_center(kp: KeypointSet) -> tuple[float, float]:
    le, re_ = kp["left_ear"], kp["right_ear"]
    return (float(le[0] + re_[0]) / 2, float(le[1] + re_[1]) / 2)


def head_side(body_height) -> float:
    return float(HEAD_FRACTION * Fraction(body_height))


def head_box(kp: KeypointSet, body_height, width: int, height: int) -> HeadBox:
    """Square box of side 2/9 body height centered on the ear midpoint.

    Corners are clamped to ``[0, width] x [0, height]``; the box is
    degenerate when nothing of it is left inside the image.
    """
    if body_height <= 0:
        raise ValueError("body_height must be positive")
    cx, cy = head_center(kp)
    side = head_side(body_height)
    half = side / 2
    tl = (min(max(cx - half, 0.0), width), min(max(cy - half, 0.0), height))
    br = (min(max(cx + half, 0.0), width), min(max(cy + half, 0.0), height))
    box = HeadBox((cx, cy), side, tl, br)
    if br[0] <= tl[0] or br[1] <= tl[1]:
        raise DegenerateBox(f"head box empty after clamping to {width}x{height} (center {cx:.1f},{cy:.1f})")
    return box


def crop(img: PixelBuffer, box: HeadBox) -> np.ndarray:
    x0, y0, x1, y1 = box.pixel_bounds()
    return img.pixels[y0:y1, x0:x1]


@dataclass
class FaceManifest:
    rows: list[tuple[str, str, int]] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    errors: list[tuple[str, str, str]] = field(default_factory=list)  # (sample_id, code, message)


def _safe_name(sample_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", sample_id)


def crop_heads(samples, poses, out_dir, load_image) -> FaceManifest:
    """Write one PNG head crop per frontal sample into ``out_dir/faces``.

    ``samples`` yields ``(ImageRecord, KeypointSet)`` pairs, ``poses`` maps
    sample_id to pose and ``load_image`` turns a record into a PixelBuffer.
    Per-sample failures are recorded rather than aborting the batch; only an
    unwritable output directory raises.
    """
    out_dir = Path(out_dir)
    face_dir = out_dir / "faces"
    try:
        face_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise WriteError(f"cannot create {face_dir}: {exc}") from exc

    manifest = FaceManifest()
    for record, kp in sorted(samples, key=lambda s: s[0].sample_id):
        sid = record.sample_id
        if poses.get(sid) != "frontal":
            manifest.skipped.append(sid)
            continue
        try:
            img = load_image(record)
            box = head_box(kp, img.height, img.width, img.height)
            face = crop(img, box)
        except AuditError as exc:
            manifest.errors.append((sid, exc.code, str(exc)))
            continue
        rel = Path("faces") / f"{_safe_name(sid)}.png"
        try:
            Image.fromarray(np.ascontiguousarray(face)).save(out_dir / rel, format="PNG")
        except OSError as exc:
            raise WriteError(f"cannot write {out_dir / rel}: {exc}") from exc
        manifest.rows.append((sid, rel.as_posix(), record.gender_gt))

    if not manifest.rows:
        log.warning("no frontal samples produced a face crop")
    return manifest
