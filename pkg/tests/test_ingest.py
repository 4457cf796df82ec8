import json

import numpy as np
import pytest
from PIL import Image

from biomaudit.errors import (
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
from biomaudit.ingest import (
    KEYPOINT_NAMES,
    KeypointSet,
    decode_image,
    join_records,
    load_keypoints,
    load_manifest,
    load_predictions,
)

HEADER = "sample_id,path,dataset,split,gender_gt\n"


def write(path, text):
    path.write_text(text)
    return path


def kp_file(tmp_path, entries):
    return write(tmp_path / "kp.json", json.dumps(entries))


def test_manifest_three_rows(tmp_path):
    p = write(tmp_path / "m.csv", HEADER + "a,a.png,PETA,test,0\nb,b.png,RAP,train,1\nc,/abs/c.png,RAP,val,1\n")
    recs = load_manifest(p)
    assert [r.sample_id for r in recs] == ["a", "b", "c"]
    assert recs[0].path == tmp_path / "a.png"
    assert str(recs[2].path) == "/abs/c.png"
    assert [r.gender_gt for r in recs] == [0, 1, 1]


def test_manifest_empty_after_header(tmp_path):
    assert load_manifest(write(tmp_path / "m.csv", HEADER)) == []


def test_manifest_duplicate_id(tmp_path):
    with pytest.raises(DuplicateId):
        load_manifest(write(tmp_path / "m.csv", HEADER + "a,a.png,P,test,0\na,b.png,P,test,1\n"))


@pytest.mark.parametrize(
    "row", ["a,a.png,P,test,2", "a,,P,test,1", "a,a.png,P,holdout,1", ",a.png,P,test,1"]
)
def test_manifest_bad_rows_report_row_index(tmp_path, row):
    with pytest.raises(ParseError) as err:
        load_manifest(write(tmp_path / "m.csv", HEADER + "z,z.png,P,test,0\n" + row + "\n"))
    assert err.value.row == 2


def test_manifest_missing_file_and_header(tmp_path):
    with pytest.raises(MissingFile):
        load_manifest(tmp_path / "nope.csv")
    with pytest.raises(ParseError):
        load_manifest(write(tmp_path / "m.csv", "id,path\n"))


def test_keypoints_zeros(tmp_path):
    kps = load_keypoints(kp_file(tmp_path, [{"image_id": "a", "keypoints": [0] * 51, "score": 0.3}]))
    assert np.all(kps["a"].conf == 0)
    assert kps.n_clamped == 0


def test_keypoints_wrong_arity(tmp_path):
    with pytest.raises(WrongArity):
        load_keypoints(kp_file(tmp_path, [{"image_id": "a", "keypoints": [0] * 50}]))


def test_keypoints_clamped(tmp_path):
    vec = [0.0] * 51
    vec[2] = 1.2
    vec[5] = -0.1
    kps = load_keypoints(kp_file(tmp_path, [{"image_id": "a", "keypoints": vec, "score": 1}]))
    assert kps["a"].conf[0] == 1.0
    assert kps["a"].conf[1] == 0.0
    assert kps.n_clamped == 2


def test_keypoints_order_is_coco(tmp_path):
    vec = []
    for i in range(17):
        vec += [i, 100 + i, 0.5]
    kp = load_keypoints(kp_file(tmp_path, [{"image_id": "a", "keypoints": vec}]))["a"]
    for i, name in enumerate(KEYPOINT_NAMES):
        assert tuple(kp[name]) == (i, 100 + i, 0.5)


def test_keypoints_reload_identical(tmp_path):
    p = kp_file(tmp_path, [{"image_id": s, "keypoints": list(np.linspace(0, 1, 51))} for s in "abc"])
    assert load_keypoints(p) == load_keypoints(p)


def test_keypointset_is_read_only():
    kp = KeypointSet(np.zeros((17, 3)))
    with pytest.raises(ValueError):
        kp.data[0, 0] = 1


PRED_HEADER = "model_id,sample_id,gender_pred\n"


def test_predictions_five_models(tmp_path):
    rows = "".join(f"m{m},s{s},{(m + s) % 2}\n" for m in range(5) for s in range(2))
    table = load_predictions(write(tmp_path / "p.csv", PRED_HEADER + rows))
    assert len(table.rows) == 10
    assert table.model_ids == [f"m{m}" for m in range(5)]


def test_predictions_bad_value(tmp_path):
    with pytest.raises(ParseError):
        load_predictions(write(tmp_path / "p.csv", PRED_HEADER + "m,s,2\n"))


def test_predictions_duplicate_pair(tmp_path):
    with pytest.raises(DuplicatePair):
        load_predictions(write(tmp_path / "p.csv", PRED_HEADER + "m,s,1\nm,s,0\n"))


def test_decode_png_dimensions(tmp_path):
    Image.new("RGB", (64, 128), (10, 20, 30)).save(tmp_path / "a.png")
    buf = decode_image(tmp_path / "a.png")
    assert (buf.width, buf.height, buf.channels) == (64, 128, 3)
    assert tuple(buf.pixels[5, 5]) == (10, 20, 30)


def test_decode_grayscale_expands(tmp_path):
    g = (np.arange(12 * 9).reshape(9, 12) % 256).astype(np.uint8)
    Image.fromarray(g, mode="L").save(tmp_path / "g.png")
    buf = decode_image(tmp_path / "g.png")
    assert buf.pixels.shape == (9, 12, 3)
    assert np.array_equal(buf.pixels[..., 0], g)
    assert np.array_equal(buf.pixels[..., 0], buf.pixels[..., 1])
    assert np.array_equal(buf.pixels[..., 1], buf.pixels[..., 2])


def test_decode_jpeg(tmp_path):
    Image.new("RGB", (20, 10), (200, 100, 50)).save(tmp_path / "a.jpg", quality=95)
    assert decode_image(tmp_path / "a.jpg").width == 20


def test_decode_truncated(tmp_path):
    Image.new("RGB", (64, 64), (1, 2, 3)).save(tmp_path / "a.png")
    data = (tmp_path / "a.png").read_bytes()
    (tmp_path / "t.png").write_bytes(data[: len(data) // 2])
    with pytest.raises(DecodeError):
        decode_image(tmp_path / "t.png")


def test_decode_unsupported(tmp_path):
    Image.new("RGB", (4, 4)).save(tmp_path / "a.bmp")
    with pytest.raises(UnsupportedFormat):
        decode_image(tmp_path / "a.bmp")


def _records(tmp_path, ids):
    p = write(tmp_path / "m.csv", HEADER + "".join(f"{i},{i}.png,P,test,1\n" for i in ids))
    return load_manifest(p)


def _kps(ids):
    return {i: KeypointSet(np.zeros((17, 3))) for i in ids}


def _preds(tmp_path, ids, models=("m1", "m2")):
    p = write(tmp_path / "p.csv", PRED_HEADER + "".join(f"{m},{i},1\n" for m in models for i in ids))
    return load_predictions(p)


def test_join_full(tmp_path):
    res = join_records(_records(tmp_path, "ba"), _kps("ab"), _preds(tmp_path, "ab"))
    assert [r.sample_id for r in res.rows] == ["a", "b"]
    assert res.rows[0].predictions == {"m1": 1, "m2": 1}


def test_join_reports_drops(tmp_path):
    res = join_records(_records(tmp_path, "ab"), _kps("a"))
    assert [r.sample_id for r in res.rows] == ["a"]
    assert res.dropped["keypoints"] == 1


def test_join_drops_partially_predicted(tmp_path):
    preds = load_predictions(write(tmp_path / "p.csv", PRED_HEADER + "m1,a,1\nm2,a,0\nm1,b,1\n"))
    res = join_records(_records(tmp_path, "ab"), None, preds)
    assert [r.sample_id for r in res.rows] == ["a"]
    assert res.dropped["predictions"] == 1


def test_join_disjoint(tmp_path):
    with pytest.raises(EmptyJoin):
        join_records(_records(tmp_path, "ab"), _kps("cd"))


def test_join_strict_unknown(tmp_path):
    join_records(_records(tmp_path, "ab"), _kps("abz"))
    with pytest.raises(UnknownSample):
        join_records(_records(tmp_path, "ab"), _kps("abz"), strict=True)


def test_join_subset_property(tmp_path):
    rng = np.random.default_rng(0)
    universe = [f"s{i}" for i in range(30)]
    for _ in range(20):
        m = [s for s in universe if rng.random() < 0.7]
        k = [s for s in universe if rng.random() < 0.7]
        if not set(m) & set(k):
            continue
        res = join_records(_records(tmp_path, m), _kps(k))
        ids = [r.sample_id for r in res.rows]
        assert set(ids) <= set(m)
        assert len(ids) <= min(len(m), len(k))
        assert ids == sorted(ids)
