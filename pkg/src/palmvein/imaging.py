"""Image decoding and the preprocessing chain applied to every palm image.

Images travel through the pipeline as :class:`GrayImage` values: an 8-bit
intensity matrix stored row-major as ``pixels[row, col]``.  The chain used by
the feature builder is grayscale decode -> contrast-limited adaptive histogram
equalization -> negative -> bilinear resize.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DecodeError, ParameterError

# ITU-R BT.601 luma weights
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable 8-bit grayscale image."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ParameterError(f"pixels must be a non-empty 2-D array, got shape {px.shape}")
        if px.dtype != np.uint8:
            if np.issubdtype(px.dtype, np.floating) and not np.all(np.isfinite(px)):
                raise ParameterError("pixels contain non-finite values")
            if px.min() < 0 or px.max() > 255:
                raise ParameterError("intensities must lie in [0, 255]")
            px = px.astype(np.uint8)
        px = px.copy()
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def from_float(cls, values) -> "GrayImage":
        """Round half up and clamp an arbitrary real matrix into an image."""
        v = np.floor(np.asarray(values, dtype=np.float64) + 0.5)
        return cls(np.clip(v, 0, 255).astype(np.uint8))

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __repr__(self):
        return f"GrayImage(width={self.width}, height={self.height})"


@dataclass(frozen=True)
class AheParams:
    """Contrast-limited adaptive equalization settings.

    ``clip_limit`` multiplies the height a bin would have if the tile's
    histogram were flat; very large values disable clipping.
    """

    tile_grid: tuple[int, int] = (8, 8)
    clip_limit: float = 2.0
    bins: int = 256

    def __post_init__(self):
        rows, cols = self.tile_grid
        if int(rows) < 1 or int(cols) < 1:
            raise ParameterError(f"tile_grid must be positive, got {self.tile_grid}")
        object.__setattr__(self, "tile_grid", (int(rows), int(cols)))
        if not self.clip_limit >= 1.0:
            raise ParameterError(f"clip_limit must be >= 1.0, got {self.clip_limit}")
        if not 1 <= int(self.bins) <= 256:
            raise ParameterError(f"bins must be in [1, 256], got {self.bins}")


# ---------------------------------------------------------------- decoding


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=np.float64)
    y = LUMA_WEIGHTS[0] * rgb[..., 0] + LUMA_WEIGHTS[1] * rgb[..., 1] + LUMA_WEIGHTS[2] * rgb[..., 2]
    return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)


def decode_bmp(data: bytes) -> GrayImage:
    """Decode an uncompressed 24-bit BMP into its luminance image."""
    data = bytes(data)
    if len(data) < 54:
        raise DecodeError(f"file too short for BMP headers ({len(data)} bytes)")
    if data[:2] != b"BM":
        raise DecodeError(f"bad signature {data[:2]!r}, expected b'BM'")
    (offset,) = struct.unpack_from("<I", data, 10)
    header_size, width, height, planes, bitcount, compression = struct.unpack_from("<IiiHHI", data, 14)
    if header_size < 40:
        raise DecodeError(f"unsupported info header size {header_size} (need BITMAPINFOHEADER, 40+)")
    if width <= 0:
        raise DecodeError(f"invalid width {width}")
    if height == 0:
        raise DecodeError("invalid height 0")
    if planes != 1:
        raise DecodeError(f"invalid planes field {planes}, expected 1")
    if bitcount != 24:
        raise DecodeError(f"unsupported bit depth {bitcount}, only 24-bit is supported")
    if compression != 0:
        raise DecodeError(f"unsupported compression {compression}, only BI_RGB (0) is supported")

    rows = abs(height)
    stride = (width * 3 + 3) & ~3
    end = offset + stride * rows
    if offset < 14 + header_size or end > len(data):
        raise DecodeError(f"pixel data offset {offset} / size {stride * rows} inconsistent with file length {len(data)}")

    raw = np.frombuffer(data, dtype=np.uint8, count=stride * rows, offset=offset)
    bgr = raw.reshape(rows, stride)[:, : width * 3].reshape(rows, width, 3)
    if height > 0:  # bottom-up storage
        bgr = bgr[::-1]
    return GrayImage(rgb_to_gray(bgr[..., ::-1]))


def encode_bmp(pixels: np.ndarray) -> bytes:
    """Encode a gray ``(h, w)`` or RGB ``(h, w, 3)`` uint8 array as a bottom-up 24-bit BMP."""
    px = np.asarray(pixels, dtype=np.uint8)
    if px.ndim == 2:
        px = np.repeat(px[..., None], 3, axis=2)
    if px.ndim != 3 or px.shape[2] != 3:
        raise ParameterError(f"expected (h, w) or (h, w, 3) array, got {px.shape}")
    h, w = px.shape[:2]
    stride = (w * 3 + 3) & ~3
    body = np.zeros((h, stride), dtype=np.uint8)
    body[:, : w * 3] = px[::-1, :, ::-1].reshape(h, w * 3)
    size = 54 + body.size
    header = struct.pack("<2sIHHI", b"BM", size, 0, 0, 54)
    info = struct.pack("<IiiHHIIiiII", 40, w, h, 1, 24, 0, body.size, 2835, 2835, 0, 0)
    return header + info + body.tobytes()


def decode_pgm(data: bytes) -> GrayImage:
    """Decode a binary (P5) PGM with maxval <= 255."""
    data = bytes(data)
    if data[:2] != b"P5":
        raise DecodeError(f"bad PGM magic {data[:2]!r}, expected b'P5'")
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DecodeError("truncated PGM header")
        tokens.append(data[start:pos])
    pos += 1  # single whitespace before the raster
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise DecodeError(f"non-numeric PGM header fields {tokens!r}") from None
    if width <= 0 or height <= 0:
        raise DecodeError(f"invalid PGM dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise DecodeError(f"unsupported PGM maxval {maxval}, only 8-bit is supported")
    if len(data) - pos < width * height:
        raise DecodeError(f"PGM raster truncated: need {width * height} bytes, have {len(data) - pos}")
    px = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos).reshape(height, width)
    if maxval != 255:
        px = np.floor(np.minimum(px, maxval) * (255.0 / maxval) + 0.5)
    return GrayImage(px)


def encode_pgm(img: GrayImage) -> bytes:
    return f"P5\n{img.width} {img.height}\n255\n".encode("ascii") + img.pixels.tobytes()


def decode_image(data: bytes) -> GrayImage:
    """Decode BMP or PGM bytes, dispatching on the magic number."""
    head = bytes(data[:2])
    if head == b"BM":
        return decode_bmp(data)
    if head == b"P5":
        return decode_pgm(data)
    raise DecodeError(f"unrecognised image signature {head!r} (expected BMP or binary PGM)")


def load_image(path) -> GrayImage:
    return decode_image(Path(path).read_bytes())


# ---------------------------------------------------------- preprocessing


def negative(img: GrayImage) -> GrayImage:
    return GrayImage(255 - img.pixels)


def _tile_luts(bins_img: np.ndarray, params: AheParams, tile_h: int, tile_w: int) -> np.ndarray:
    rows, cols = params.tile_grid
    nbins = params.bins
    area = tile_h * tile_w
    tiles = bins_img.reshape(rows, tile_h, cols, tile_w).transpose(0, 2, 1, 3).reshape(rows * cols, area)
    offsets = (np.arange(rows * cols) * nbins)[:, None]
    hist = np.bincount((tiles + offsets).ravel(), minlength=rows * cols * nbins)
    hist = hist.reshape(rows * cols, nbins).astype(np.float64)

    limit = max(params.clip_limit * area / nbins, 1.0)
    excess = np.maximum(hist - limit, 0.0).sum(axis=1, keepdims=True)
    hist = np.minimum(hist, limit) + excess / nbins

    cdf = np.cumsum(hist, axis=1)
    lut = np.floor(cdf * (255.0 / area) + 0.5)
    return np.clip(lut, 0, 255).reshape(rows, cols, nbins)


def _interp_axis(n: int, tile: int, ntiles: int):
    f = (np.arange(n) + 0.5) / tile - 0.5
    lo = np.floor(f).astype(int)
    w = f - lo
    i0 = np.clip(lo, 0, ntiles - 1)
    i1 = np.clip(lo + 1, 0, ntiles - 1)
    return i0, i1, w


def adaptive_hist_eq(img: GrayImage, params: AheParams | None = None) -> GrayImage:
    """Contrast-limited adaptive histogram equalization.

    The image is cut into ``tile_grid`` tiles (edge-replicated to a whole
    number of tiles).  Each tile gets a clipped-histogram equalization lookup
    table and every pixel blends the tables of its four nearest tile centres
    bilinearly.
    """
    params = params or AheParams()
    rows, cols = params.tile_grid
    h, w = img.height, img.width
    if h < rows or w < cols:
        raise ParameterError(f"image {w}x{h} is smaller than one tile of a {rows}x{cols} grid")
    tile_h = -(-h // rows)
    tile_w = -(-w // cols)
    padded = np.pad(img.pixels, ((0, rows * tile_h - h), (0, cols * tile_w - w)), mode="edge")
    bins_img = (padded.astype(np.int64) * params.bins) // 256
    lut = _tile_luts(bins_img, params, tile_h, tile_w)

    b = bins_img[:h, :w]
    y0, y1, wy = _interp_axis(h, tile_h, rows)
    x0, x1, wx = _interp_axis(w, tile_w, cols)
    y0, y1, wy = y0[:, None], y1[:, None], wy[:, None]
    top = (1 - wx) * lut[y0, x0[None, :], b] + wx * lut[y0, x1[None, :], b]
    bottom = (1 - wx) * lut[y1, x0[None, :], b] + wx * lut[y1, x1[None, :], b]
    return GrayImage.from_float((1 - wy) * top + wy * bottom)


def _bilinear_axis(n_in: int, n_out: int):
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0, n_in - 1)
    i0 = np.floor(src).astype(int)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, src - i0


def resize(img: GrayImage, width: int, height: int) -> GrayImage:
    """Bilinear resize using pixel-centre alignment."""
    if int(width) < 1 or int(height) < 1:
        raise ParameterError(f"target size must be at least 1x1, got {width}x{height}")
    if (width, height) == (img.width, img.height):
        return img
    src = img.pixels.astype(np.float64)
    x0, x1, wx = _bilinear_axis(img.width, int(width))
    rows = src[:, x0] * (1 - wx) + src[:, x1] * wx
    y0, y1, wy = _bilinear_axis(img.height, int(height))
    out = rows[y0] * (1 - wy)[:, None] + rows[y1] * wy[:, None]
    return GrayImage.from_float(out)


@dataclass(frozen=True)
class PreprocessConfig:
    ahe: AheParams = field(default_factory=AheParams)
    size: int = 128


def preprocess(img: GrayImage, config: PreprocessConfig | None = None) -> GrayImage:
    """Equalize, invert and resize a decoded grayscale palm image."""
    config = config or PreprocessConfig()
    out = negative(adaptive_hist_eq(img, config.ahe))
    return resize(out, config.size, config.size)
