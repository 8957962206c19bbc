import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from palmvein.errors import DimensionError
from palmvein.wavelet import (
    DwtPyramid,
    SubbandSelection,
    dwt2_forward,
    dwt2_inverse,
    extract_features,
    feature_length,
)


def haar_matrix(n: int) -> np.ndarray:
    """One analysis level as an n x n orthonormal matrix: pair sums on top, pair differences below."""
    W = np.zeros((n, n))
    for i in range(n // 2):
        W[i, 2 * i] = W[i, 2 * i + 1] = 1 / np.sqrt(2)
        W[n // 2 + i, 2 * i] = 1 / np.sqrt(2)
        W[n // 2 + i, 2 * i + 1] = -1 / np.sqrt(2)
    return W


def matrix_oracle(x: np.ndarray, levels: int) -> np.ndarray:
    out = np.array(x, dtype=float)
    h, w = out.shape
    for _ in range(levels):
        out[:h, :w] = haar_matrix(h) @ out[:h, :w] @ haar_matrix(w).T
        h, w = h // 2, w // 2
    return out


def test_two_by_two_example():
    pyr = dwt2_forward(np.array([[4.0, 2.0], [2.0, 0.0]]), levels=1)
    assert pyr.band("LL")[0, 0] == pytest.approx(4)
    assert pyr.band("HL", 1)[0, 0] == pytest.approx(2)
    assert pyr.band("LH", 1)[0, 0] == pytest.approx(2)
    assert pyr.band("HH", 1)[0, 0] == pytest.approx(0)


@pytest.mark.parametrize("c", [0.0, 1.0, 37.5, 255.0])
def test_constant_image_has_no_detail(c):
    pyr = dwt2_forward(np.full((4, 4), c), levels=1)
    assert np.allclose(pyr.band("LL"), 2 * c, rtol=1e-15, atol=0)
    for name in ("LH", "HL", "HH"):
        assert np.all(pyr.band(name, 1) == 0)


@pytest.mark.parametrize("shape, levels", [((8, 8), 1), ((8, 8), 2), ((16, 32), 3), ((12, 20), 2)])
def test_matches_matrix_form(rng, shape, levels):
    x = rng.normal(size=shape)
    assert np.allclose(dwt2_forward(x, levels).layout, matrix_oracle(x, levels), atol=1e-12)


def test_energy_preserved_8x8(rng):
    x = rng.normal(size=(8, 8))
    assert np.sum(dwt2_forward(x, 2).layout ** 2) == pytest.approx(np.sum(x**2), abs=1e-9)


def test_zero_pyramid_inverts_to_zero():
    assert np.all(dwt2_inverse(DwtPyramid(2, np.zeros((8, 8)))) == 0)


def test_round_trip_16(rng):
    x = rng.normal(size=(16, 16))
    assert np.sqrt(np.mean((dwt2_inverse(dwt2_forward(x, 2)) - x) ** 2)) < 1e-9


def test_ll_only_pyramid_inverts_to_constant():
    layout = np.zeros((4, 4))
    layout[0, 0] = 8.0  # level-2 LL of a 4x4 constant-2 image is 2 * 2 * 2
    assert np.allclose(dwt2_inverse(DwtPyramid(2, layout)), 2.0)


@given(
    st.sampled_from([4, 8, 16, 64]),
    st.integers(1, 2),
    st.floats(-3, 3),
    st.floats(-3, 3),
    st.integers(0, 2**32 - 1),
)
def test_linearity(n, levels, a, b, seed):
    r = np.random.default_rng(seed)
    X, Y = r.normal(size=(n, n)), r.normal(size=(n, n))
    lhs = dwt2_forward(a * X + b * Y, levels).layout
    rhs = a * dwt2_forward(X, levels).layout + b * dwt2_forward(Y, levels).layout
    assert np.allclose(lhs, rhs, atol=1e-9)


@given(arrays(np.float64, st.sampled_from([(4, 4), (8, 16), (16, 8)]), elements=st.floats(-1e3, 1e3)))
def test_round_trip_property(x):
    assert np.allclose(dwt2_inverse(dwt2_forward(x, 2)), x, atol=1e-9)


def test_energy_per_level(rng):
    x = rng.normal(size=(32, 32))
    pyr = dwt2_forward(x, 2)
    level1 = dwt2_forward(x, 1).layout
    # level 2 only reshuffles energy inside the level-1 LL block
    assert np.sum(level1[:16, :16] ** 2) == pytest.approx(np.sum(pyr.layout[:16, :16] ** 2), rel=1e-12)


def test_indivisible_size_names_divisor():
    with pytest.raises(DimensionError, match="divisible by 4"):
        dwt2_forward(np.zeros((6, 8)), levels=2)


@pytest.mark.parametrize(
    "mode, length", [(SubbandSelection.ALL, 16384), (SubbandSelection.LL_ONLY, 1024), (SubbandSelection.DEEPEST_LEVEL, 4096)]
)
def test_feature_lengths_128(mode, length):
    feats = extract_features(dwt2_forward(np.zeros((128, 128)), 2), mode)
    assert len(feats) == length == feature_length(128, 128, 2, mode)


@given(st.integers(1, 8), st.integers(1, 8), st.integers(1, 3), st.sampled_from(list(SubbandSelection)))
def test_feature_length_formula(hb, wb, levels, mode):
    h, w = hb << levels, wb << levels
    feats = extract_features(dwt2_forward(np.ones((h, w)), levels), mode)
    assert len(feats) == feature_length(h, w, levels, mode)


def test_feature_order_deepest_first():
    x = np.arange(64, dtype=float).reshape(8, 8)
    pyr = dwt2_forward(x, 2)
    feats = extract_features(pyr, "all")
    expected = np.concatenate(
        [pyr.band("LL").ravel()]
        + [pyr.band(b, 2).ravel() for b in ("LH", "HL", "HH")]
        + [pyr.band(b, 1).ravel() for b in ("LH", "HL", "HH")]
    )
    assert np.array_equal(feats, expected)
    assert np.array_equal(np.sort(feats), np.sort(pyr.layout.ravel()))
