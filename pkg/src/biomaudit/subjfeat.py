"""Keypoint-confidence region features, pose classification and feature rows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry
from .imgfeat import ImageFeatures
from .ingest import KP_INDEX, ImageRecord, KeypointSet

REGIONS = {
    "face": ("nose", "left_eye", "right_eye", "left_ear", "right_ear"),
    "upper": ("left_shoulder", "right_shoulder", "left_elbow", "right_elbow", "left_wrist", "right_wrist"),
    "lower": ("left_hip", "right_hip", "left_knee", "right_knee", "left_ankle", "right_ankle"),
}

POSES = ("frontal", "sideways", "backside")
POSE_CODE = {p: i for i, p in enumerate(POSES)}

FEATURES = ("resolution", "luminosity", "blurriness", "face_conf", "upper_conf", "lower_conf", "pose")

SIDEWAYS_RATIO = 0.5


@dataclass(frozen=True)
class SubjectFeatures:
    face_conf: float
    upper_conf: float
    lower_conf: float
    pose: str


@dataclass(frozen=True)
class FeatureRow:
    sample_id: str
    values: tuple[float, ...]  # ordered as FEATURES, pose ordinal-encoded
    pose: str
    meta_label: int | None = None
    dataset: str = ""
    split: str = ""
    gender_gt: int | None = None

    def __post_init__(self):
        if len(self.values) != len(FEATURES):
            raise ValueError(f"expected {len(FEATURES)} feature values, got {len(self.values)}")
        if self.meta_label not in (None, 0, 1):
            raise ValueError(f"meta_label must be 0 or 1, got {self.meta_label!r}")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURES, self.values))


def region_confidence(kp: KeypointSet, region: str) -> float:
    idx = [KP_INDEX[name] for name in REGIONS[region]]
    return float(np.mean(kp.conf[idx]))


def classify_pose(kp: KeypointSet) -> str:
    """Three-way pose from shoulder/hip geometry (image origin top-left).

    Sideways is decided first: horizontal shoulder extent over the vertical
    distance between shoulder and hip midpoints below 0.5. Otherwise the
    subject is frontal when its left shoulder lies to the right in the image.
    """
    ls, rs = kp["left_shoulder"], kp["right_shoulder"]
    lh, rh = kp["left_hip"], kp["right_hip"]
    shoulder_len = abs(rs[0] - ls[0])
    upper_height = abs((ls[1] + rs[1]) / 2 - (lh[1] + rh[1]) / 2)
    if upper_height == 0:
        raise DegenerateGeometry("shoulders and hips share the same mean height")
    if shoulder_len / upper_height < SIDEWAYS_RATIO:
        return "sideways"
    return "frontal" if ls[0] > rs[0] else "backside"


def subject_features(kp: KeypointSet) -> SubjectFeatures:
    return SubjectFeatures(
        region_confidence(kp, "face"),
        region_confidence(kp, "upper"),
        region_confidence(kp, "lower"),
        classify_pose(kp),
    )


def build_feature_row(
    record: ImageRecord, img: ImageFeatures, subj: SubjectFeatures, meta_label: int | None = None
) -> FeatureRow:
    values = (
        float(img.resolution),
        img.luminosity,
        img.blurriness,
        subj.face_conf,
        subj.upper_conf,
        subj.lower_conf,
        float(POSE_CODE[subj.pose]),
    )
    return FeatureRow(
        record.sample_id, values, subj.pose, meta_label, record.dataset, record.split, record.gender_gt
    )
