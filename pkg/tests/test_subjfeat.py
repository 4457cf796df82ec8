import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from biomaudit.errors import DegenerateGeometry
from biomaudit.imgfeat import ImageFeatures
from biomaudit.ingest import KP_INDEX, ImageRecord, KeypointSet
from biomaudit.subjfeat import (
    FEATURES,
    POSE_CODE,
    REGIONS,
    SubjectFeatures,
    build_feature_row,
    classify_pose,
    region_confidence,
    subject_features,
)
from conftest import make_kp


def test_face_confidence_mean():
    confs = dict(zip(REGIONS["face"], (0.9, 0.8, 0.8, 0.7, 0.8)))
    kp = make_kp(**{k: (0, 0, c) for k, c in confs.items()})
    assert region_confidence(kp, "face") == pytest.approx(0.8)


def test_zero_and_full_confidence():
    assert region_confidence(make_kp(conf=0.0), "lower") == 0
    kp = make_kp(conf=0.2, **{k: (0, 0, 1.0) for k in REGIONS["upper"]})
    assert region_confidence(kp, "upper") == 1


def test_region_sizes():
    assert [len(REGIONS[r]) for r in ("face", "upper", "lower")] == [5, 6, 6]
    assert sorted(sum(REGIONS.values(), ())) == sorted(KP_INDEX)


def body(ls, rs, lh_y, rh_y=None):
    rh_y = lh_y if rh_y is None else rh_y
    return make_kp(left_shoulder=ls, right_shoulder=rs, left_hip=(ls[0], lh_y), right_hip=(rs[0], rh_y))


def test_pose_frontal():
    assert classify_pose(body((100, 0), (50, 0), 80)) == "frontal"


def test_pose_backside():
    assert classify_pose(body((50, 0), (100, 0), 80)) == "backside"


def test_pose_sideways():
    assert classify_pose(body((100, 50), (110, 50), 90)) == "sideways"


def test_pose_ratio_boundary():
    # exactly 0.5 is not sideways
    assert classify_pose(body((60, 0), (20, 0), 80)) == "frontal"
    assert classify_pose(body((59.9, 0), (20, 0), 80)) == "sideways"


def test_pose_degenerate():
    with pytest.raises(DegenerateGeometry):
        classify_pose(body((100, 10), (50, 10), 10))


# integer pixel coordinates keep mirroring and translation exact
coords = st.integers(-500, 500).map(float)
kp_arrays = arrays(float, (17, 2), elements=coords)


def _kpset(xy, conf=None):
    arr = np.zeros((17, 3))
    arr[:, :2] = xy
    arr[:, 2] = 0.5 if conf is None else conf
    return KeypointSet(arr)


def _upper_height(xy):
    s = (xy[KP_INDEX["left_shoulder"], 1] + xy[KP_INDEX["right_shoulder"], 1]) / 2
    h = (xy[KP_INDEX["left_hip"], 1] + xy[KP_INDEX["right_hip"], 1]) / 2
    return abs(s - h)


@given(kp_arrays, st.integers(0, 1000))
def test_mirror_swaps_facing(xy, W):
    if _upper_height(xy) == 0:
        return
    mirrored = xy.copy()
    mirrored[:, 0] = W - mirrored[:, 0]
    before, after = classify_pose(_kpset(xy)), classify_pose(_kpset(mirrored))
    swap = {"frontal": "backside", "backside": "frontal", "sideways": "sideways"}
    if before != "sideways" and xy[KP_INDEX["left_shoulder"], 0] == xy[KP_INDEX["right_shoulder"], 0]:
        return
    assert after == swap[before]


@given(kp_arrays, st.integers(-300, 300), st.integers(-300, 300))
def test_translation_invariant(xy, dx, dy):
    if _upper_height(xy) == 0:
        return
    moved = xy + np.array([dx, dy])
    a, b = _kpset(xy), _kpset(moved)
    assert classify_pose(a) == classify_pose(b)
    for r in REGIONS:
        assert region_confidence(a, r) == region_confidence(b, r)


@given(arrays(float, 17, elements=st.floats(0, 1)))
def test_region_confidence_brute_force(conf):
    kp = _kpset(np.zeros((17, 2)), conf)
    for region, names in REGIONS.items():
        expected = sum(conf[KP_INDEX[n]] for n in names) / len(names)
        assert region_confidence(kp, region) == pytest.approx(expected, abs=1e-12)


@given(kp_arrays)
def test_pose_total(xy):
    if _upper_height(xy) == 0:
        return
    assert classify_pose(_kpset(xy)) in ("frontal", "sideways", "backside")


REC = ImageRecord("s1", "s1.png", "PETA", "test", 1)
IMG = ImageFeatures(8192, 100.5, 33.0)


def test_feature_row_layout():
    subj = SubjectFeatures(0.8, 0.7, 0.6, "frontal")
    row = build_feature_row(REC, IMG, subj, meta_label=1)
    assert len(row.values) == 7
    assert row.as_dict() == dict(zip(FEATURES, (8192.0, 100.5, 33.0, 0.8, 0.7, 0.6, 0.0)))
    assert row == build_feature_row(REC, IMG, subj, meta_label=1)


@pytest.mark.parametrize("pose,code", [("frontal", 0), ("sideways", 1), ("backside", 2)])
def test_pose_encoding(pose, code):
    assert POSE_CODE[pose] == code
    row = build_feature_row(REC, IMG, SubjectFeatures(0, 0, 0, pose))
    assert row.values[-1] == code
    assert row.pose == pose


def test_subject_features_bundle():
    kp = body((100, 0), (50, 0), 80)
    sf = subject_features(kp)
    assert sf.pose == "frontal"
    assert sf.face_conf == pytest.approx(0.5)
