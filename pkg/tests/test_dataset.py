import os

import numpy as np
import pytest

from palmvein.dataset import (
    SYNTH_LAYOUT,
    FeatureConfig,
    SynthSpec,
    _class_veins,
    build_feature_matrix,
    read_feature_cache,
    render_veins,
    scan_dataset,
    synth_generate,
    write_feature_cache,
    write_synthetic,
)
from palmvein.errors import DatasetError, DecodeError, ParameterError
from palmvein.imaging import GrayImage, encode_bmp
from palmvein.labeled import LabeledDataset
from palmvein.wavelet import SubbandSelection


def write_bmp(path, value=100, size=16):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_bmp(np.full((size, size), value, np.uint8)))


def put_tree(root, subjects, shots_per_session=4, sessions=3, hands=("L",)):
    for hand in hands:
        for s in subjects:
            for ses in range(1, sessions + 1):
                for shot in range(1, shots_per_session + 1):
                    write_bmp(root / hand / f"{s:03d}" / f"{ses}_{shot}.bmp", size=8)


# ------------------------------------------------------------------ scan


def test_two_subjects_three_images(tmp_path):
    put_tree(tmp_path, [4, 9], shots_per_session=3, sessions=1)
    m = scan_dataset(tmp_path)
    assert len(m) == 6
    assert set(m.labels.tolist()) == {0, 1}
    assert m.class_map == {4: 0, 9: 1}


def test_empty_directory(tmp_path):
    with pytest.raises(DatasetError, match="no images"):
        scan_dataset(tmp_path)


def test_missing_root(tmp_path):
    with pytest.raises(DatasetError):
        scan_dataset(tmp_path / "nope")


def test_subject_with_one_image(tmp_path):
    put_tree(tmp_path, [1], shots_per_session=2, sessions=1)
    write_bmp(tmp_path / "L" / "002" / "1_1.bmp")
    with pytest.raises(DatasetError, match=r"single image: \[2\]"):
        scan_dataset(tmp_path)


def test_single_subject_rejected(tmp_path):
    put_tree(tmp_path, [1], shots_per_session=2, sessions=1)
    with pytest.raises(DatasetError, match="at least 2 subjects"):
        scan_dataset(tmp_path)


def test_put_sized_left_hand_tree(tmp_path):
    # 50 persons, three sessions of four images per hand
    put_tree(tmp_path, range(1, 51), hands=("L", "R"))
    m = scan_dataset(tmp_path, hand="L")
    assert len(m) == 600
    assert m.n_classes == 50
    assert all(e.hand == "L" for e in m.entries)


def test_labels_follow_sorted_subject_ids(tmp_path):
    put_tree(tmp_path, [30, 2, 11], shots_per_session=2, sessions=1)
    m = scan_dataset(tmp_path)
    assert m.class_map == {2: 0, 11: 1, 30: 2}


def test_custom_layout(tmp_path):
    for s in (1, 2):
        for k in (1, 2):
            write_bmp(tmp_path / f"person{s}_img{k}.bmp")
    (tmp_path / "notes.txt").write_text("ignored")
    m = scan_dataset(tmp_path, layout="person{subject}_img{shot}.bmp")
    assert len(m) == 4 and m.n_classes == 2


@pytest.mark.skipif(hasattr(os, "geteuid") and os.geteuid() == 0, reason="root can read anything")
def test_unreadable_file(tmp_path):
    put_tree(tmp_path, [1, 2], shots_per_session=2, sessions=1)
    victim = tmp_path / "L" / "001" / "1_1.bmp"
    victim.chmod(0)
    with pytest.raises(DatasetError, match="unreadable"):
        scan_dataset(tmp_path)


# ------------------------------------------------------------- synthetic


def test_synth_counts():
    s = synth_generate(SynthSpec(classes=10, images_per_class=12, size=128))
    assert len(s.images) == 120
    assert np.bincount(s.labels).tolist() == [12] * 10
    assert all(img.pixels.shape == (128, 128) for img in s.images)


def test_single_class_has_dark_strokes():
    spec = SynthSpec(classes=1, images_per_class=8, size=64)
    s = synth_generate(spec)
    mean = np.mean([img.pixels.astype(float) for img in s.images], axis=0)
    clean = render_veins(_class_veins(spec, 0), 64, 128.0)
    strokes = clean < spec.background - 25
    assert strokes.any()
    assert mean[strokes].mean() < mean[~strokes].mean() - 20


def test_noise_free_jitter_free_images_identical():
    s = synth_generate(SynthSpec(classes=2, images_per_class=3, size=32, noise_std=0, jitter_std=0))
    for label in (0, 1):
        group = [img for img, y in zip(s.images, s.labels) if y == label]
        assert all(g == group[0] for g in group)
    assert s.images[0] != s.images[3]


def test_synth_determinism_and_seed_dependence():
    a = synth_generate(SynthSpec(classes=3, images_per_class=2, size=32, seed=5))
    b = synth_generate(SynthSpec(classes=3, images_per_class=2, size=32, seed=5))
    c = synth_generate(SynthSpec(classes=3, images_per_class=2, size=32, seed=6))
    assert all(x == y for x, y in zip(a.images, b.images))
    assert any(x != y for x, y in zip(a.images, c.images))


@pytest.mark.parametrize("bad", [{"size": 30}, {"images_per_class": 1}, {"classes": 0}, {"noise_std": -1}])
def test_invalid_synth_spec(bad):
    with pytest.raises(ParameterError):
        SynthSpec(**bad)


def test_write_synthetic_round_trip(tmp_path):
    s = synth_generate(SynthSpec(classes=2, images_per_class=3, size=32))
    write_synthetic(s, tmp_path)
    m = scan_dataset(tmp_path, layout=SYNTH_LAYOUT)
    assert len(m) == 6
    cfg = FeatureConfig(size=32)
    assert np.array_equal(build_feature_matrix(m, cfg=cfg).X, build_feature_matrix(s, cfg=cfg).X)


# -------------------------------------------------------------- features


def test_feature_matrix_shape():
    s = synth_generate(SynthSpec(classes=2, images_per_class=5, size=64))
    data = build_feature_matrix(s)
    assert data.X.shape == (10, 16384)
    assert np.array_equal(data.y, s.labels)


@pytest.mark.parametrize("mode, d", [("ll_only", 256), ("deepest_level", 1024)])
def test_feature_modes(mode, d):
    s = synth_generate(SynthSpec(classes=2, images_per_class=2, size=64))
    assert build_feature_matrix(s, cfg=FeatureConfig(size=64, selection=SubbandSelection(mode))).X.shape == (4, d)


def test_identical_files_identical_rows(tmp_path):
    px = np.random.default_rng(0).integers(0, 256, (40, 48), dtype=np.uint8)
    for name in ("a.bmp", "b.bmp"):
        (tmp_path / name).write_bytes(encode_bmp(px))
    data = build_feature_matrix([tmp_path / "a.bmp", tmp_path / "b.bmp"], [0, 1])
    assert np.array_equal(data.X[0], data.X[1])


def test_constant_image_has_zero_detail():
    data = build_feature_matrix([GrayImage(np.full((64, 64), 90, np.uint8))], [0], FeatureConfig(size=32))
    row = data.X[0]
    assert np.all(row[64:] == 0)  # everything after the 8x8 LL block is detail
    assert np.unique(row[:64]).size == 1


def test_bad_file_error_names_path(tmp_path):
    bad = tmp_path / "broken.bmp"
    bad.write_bytes(b"BM" + b"\0" * 10)
    with pytest.raises(DecodeError, match="broken.bmp"):
        build_feature_matrix([bad], [0])
    with pytest.raises(DatasetError, match="missing.bmp"):
        build_feature_matrix([tmp_path / "missing.bmp"], [0])


def test_threaded_features_match(monkeypatch):
    s = synth_generate(SynthSpec(classes=2, images_per_class=4, size=32))
    cfg = FeatureConfig(size=32)
    serial = build_feature_matrix(s, cfg=cfg).X
    monkeypatch.setenv("PALMVEIN_WORKERS", "3")
    assert np.array_equal(build_feature_matrix(s, cfg=cfg).X, serial)


# ------------------------------------------------------------------ cache


def test_cache_round_trip_and_layout(tmp_path, rng):
    data = LabeledDataset(rng.normal(size=(5, 7)), [0, 1, 2, 1, 0])
    path = tmp_path / "f.pvfm"
    write_feature_cache(path, data)
    raw = path.read_bytes()
    assert raw[:4] == b"PVFM"
    assert int.from_bytes(raw[4:8], "little") == 1
    assert int.from_bytes(raw[8:16], "little") == 5
    assert int.from_bytes(raw[16:24], "little") == 7
    assert len(raw) == 24 + 8 * 35 + 4 * 5
    assert np.array_equal(np.frombuffer(raw[24 : 24 + 280], "<f8").reshape(5, 7), data.X)
    back = read_feature_cache(path)
    assert np.array_equal(back.X, data.X) and np.array_equal(back.y, data.y)


def test_cache_corruption_detected(tmp_path, rng):
    path = tmp_path / "f.pvfm"
    write_feature_cache(path, LabeledDataset(rng.normal(size=(2, 2)), [0, 1]))
    raw = path.read_bytes()
    for bad, msg in [(b"XXXX" + raw[4:], "magic"), (raw[:-1], "expected"), (raw[:10], "truncated")]:
        path.write_bytes(bad)
        with pytest.raises(DatasetError, match=msg):
            read_feature_cache(path)
