import io
import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from palmvein.errors import DecodeError, ParameterError
from palmvein.imaging import (
    AheParams,
    GrayImage,
    adaptive_hist_eq,
    decode_bmp,
    decode_image,
    decode_pgm,
    encode_bmp,
    encode_pgm,
    negative,
    preprocess,
    resize,
)

images = arrays(np.uint8, st.tuples(st.integers(1, 24), st.integers(1, 24)))


def bmp_bytes(rgb: np.ndarray, top_down: bool = False, bitcount: int = 24, compression: int = 0) -> bytes:
    """Hand-built BITMAPINFOHEADER BMP, independent of the library encoder."""
    h, w, _ = rgb.shape
    stride = (w * 3 + 3) & ~3
    rows = rgb[:, :, ::-1] if top_down else rgb[::-1, :, ::-1]
    body = b"".join(r.tobytes() + b"\0" * (stride - w * 3) for r in rows)
    info = struct.pack("<IiiHHIIiiII", 40, w, -h if top_down else h, 1, bitcount, compression, len(body), 2835, 2835, 0, 0)
    head = b"BM" + struct.pack("<IHHI", 54 + len(body), 0, 0, 54)
    return head + info + body


def luma(rgb):
    r, g, b = (rgb[..., i].astype(float) for i in range(3))
    return np.floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5).astype(np.uint8)


# ------------------------------------------------------------------ decode


def test_white_bmp_decodes_to_255():
    img = decode_bmp(bmp_bytes(np.full((2, 2, 3), 255, np.uint8)))
    assert (img.width, img.height) == (2, 2)
    assert np.all(img.pixels == 255)


def test_black_pixel_decodes_to_zero():
    assert decode_bmp(bmp_bytes(np.zeros((1, 1, 3), np.uint8))).pixels.tolist() == [[0]]


def test_luminance_of_100_150_200_is_141():
    img = decode_bmp(bmp_bytes(np.array([[[100, 150, 200]]], np.uint8)))
    assert img.pixels[0, 0] == 141


@pytest.mark.parametrize("top_down", [False, True])
def test_bmp_row_order_and_padding(rng, top_down):
    rgb = rng.integers(0, 256, (5, 7, 3), dtype=np.uint8)  # width 7 needs 3 pad bytes per row
    img = decode_bmp(bmp_bytes(rgb, top_down=top_down))
    assert np.array_equal(img.pixels, luma(rgb))


def test_bmp_written_by_pillow_decodes():
    Image = pytest.importorskip("PIL.Image")
    rgb = np.random.default_rng(3).integers(0, 256, (9, 6, 3), dtype=np.uint8)
    buf = io.BytesIO()
    Image.fromarray(rgb, "RGB").save(buf, format="BMP")
    assert np.array_equal(decode_bmp(buf.getvalue()).pixels, luma(rgb))


@given(images)
def test_bmp_round_trip(px):
    assert np.array_equal(decode_bmp(encode_bmp(px)).pixels, px)


@given(images)
def test_pgm_round_trip(px):
    img = GrayImage(px)
    assert decode_pgm(encode_pgm(img)) == img
    assert decode_image(encode_pgm(img)) == img


def test_pgm_with_comment_and_small_maxval():
    data = b"P5\n# made by hand\n2 1\n15\n\x00\x0f"
    assert decode_pgm(data).pixels.tolist() == [[0, 255]]


@pytest.mark.parametrize(
    "kwargs, field",
    [({"bitcount": 8}, "bit depth"), ({"compression": 1}, "compression")],
)
def test_unsupported_bmp_names_field(kwargs, field):
    with pytest.raises(DecodeError, match=field):
        decode_bmp(bmp_bytes(np.zeros((2, 2, 3), np.uint8), **kwargs))


def test_bad_signature_and_truncation():
    good = bmp_bytes(np.zeros((4, 4, 3), np.uint8))
    with pytest.raises(DecodeError, match="signature"):
        decode_bmp(b"XX" + good[2:])
    with pytest.raises(DecodeError):
        decode_bmp(good[:60])
    with pytest.raises(DecodeError):
        decode_image(b"GIF89a")


# ---------------------------------------------------------------- negative


def test_negative_examples():
    assert np.all(negative(GrayImage(np.zeros((3, 2), np.uint8))).pixels == 255)
    assert negative(GrayImage(np.array([[100]], np.uint8))).pixels[0, 0] == 155


@given(images)
def test_negative_is_involution(px):
    img = GrayImage(px)
    assert negative(negative(img)) == img
    assert negative(img).pixels.shape == px.shape


# --------------------------------------------------------------------- AHE


def global_he(px: np.ndarray) -> np.ndarray:
    """Textbook global equalization: level v -> round(255 * #{p <= v} / N)."""
    flat = px.ravel()
    counts = np.array([(flat <= v).sum() for v in range(256)], dtype=float)
    lut = np.floor(counts * 255.0 / flat.size + 0.5)
    return lut[px].astype(np.uint8)


def test_constant_image_stays_constant():
    out = adaptive_hist_eq(GrayImage(np.full((32, 32), 128, np.uint8)))
    assert len(np.unique(out.pixels)) == 1


@pytest.mark.parametrize("seed", range(5))
def test_single_tile_unclipped_equals_global_he(seed):
    px = np.random.default_rng(seed).integers(0, 256, (8, 8), dtype=np.uint8)
    out = adaptive_hist_eq(GrayImage(px), AheParams(tile_grid=(1, 1), clip_limit=1e9))
    assert np.array_equal(out.pixels, global_he(px))


def test_low_contrast_ramp_is_spread():
    ramp = np.tile(np.linspace(100, 120, 64), (64, 1))
    img = GrayImage.from_float(ramp)
    out = adaptive_hist_eq(img)
    assert out.pixels.std() > img.pixels.std()


@given(arrays(np.uint8, st.tuples(st.integers(8, 40), st.integers(8, 40))), st.floats(1.0, 8.0))
def test_ahe_preserves_shape_and_range(px, clip):
    out = adaptive_hist_eq(GrayImage(px), AheParams(clip_limit=clip))
    assert out.pixels.shape == px.shape
    assert out.pixels.dtype == np.uint8


def test_image_smaller_than_grid_is_rejected():
    with pytest.raises(ParameterError):
        adaptive_hist_eq(GrayImage(np.zeros((4, 4), np.uint8)), AheParams(tile_grid=(8, 8)))


@pytest.mark.parametrize("bad", [{"clip_limit": 0.5}, {"bins": 0}, {"bins": 300}, {"tile_grid": (0, 2)}])
def test_invalid_ahe_params(bad):
    with pytest.raises(ParameterError):
        AheParams(**bad)


# ------------------------------------------------------------------ resize


def test_resize_two_pixels_to_three():
    out = resize(GrayImage(np.array([[0, 255]], np.uint8)), 3, 1)
    assert out.pixels.tolist() == [[0, 128, 255]]


@given(images)
def test_resize_same_size_is_identity(px):
    img = GrayImage(px)
    assert resize(img, img.width, img.height) == img


@given(st.integers(0, 255), st.integers(1, 30), st.integers(1, 30))
def test_resize_constant(value, w, h):
    out = resize(GrayImage(np.full((7, 5), value, np.uint8)), w, h)
    assert out.pixels.shape == (h, w)
    assert np.all(out.pixels == value)


def test_resize_zero_target_rejected():
    with pytest.raises(ParameterError):
        resize(GrayImage(np.zeros((4, 4), np.uint8)), 0, 4)


def test_preprocess_output_size():
    px = np.random.default_rng(0).integers(0, 256, (60, 80), dtype=np.uint8)
    assert preprocess(GrayImage(px)).pixels.shape == (128, 128)


def test_gray_image_rejects_out_of_range():
    with pytest.raises(ParameterError):
        GrayImage(np.array([[300.0]]))
    with pytest.raises(ParameterError):
        GrayImage(np.zeros((0, 3)))
