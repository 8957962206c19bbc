"""Orthonormal 2-D Haar wavelet transform and feature flattening.

The pyramid is kept in the usual nested-quadrant layout: after ``levels``
decompositions the deepest approximation ``LL`` occupies the top-left
``(h / 2**levels, w / 2**levels)`` block.  At every level the top-right
quadrant holds ``HL`` (horizontal detail), the bottom-left ``LH`` and the
bottom-right ``HH``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError

_SQRT2 = np.sqrt(2.0)


class SubbandSelection(str, enum.Enum):
    ALL = "all"
    LL_ONLY = "ll_only"
    DEEPEST_LEVEL = "deepest_level"


@dataclass(frozen=True, eq=False)
class DwtPyramid:
    levels: int
    layout: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.layout.shape

    def band(self, name: str, level: int | None = None) -> np.ndarray:
        """Return subband ``name`` (``LL``, ``LH``, ``HL`` or ``HH``) at ``level``.

        Level 1 is the finest; ``LL`` exists only at the deepest level.
        """
        level = self.levels if level is None else level
        if not 1 <= level <= self.levels:
            raise ParameterError(f"level must be in [1, {self.levels}], got {level}")
        h, w = self.layout.shape
        bh, bw = h >> level, w >> level
        if name == "LL":
            if level != self.levels:
                raise ParameterError("LL is only stored at the deepest level")
            return self.layout[:bh, :bw]
        if name == "HL":
            return self.layout[:bh, bw : 2 * bw]
        if name == "LH":
            return self.layout[bh : 2 * bh, :bw]
        if name == "HH":
            return self.layout[bh : 2 * bh, bw : 2 * bw]
        raise ParameterError(f"unknown subband {name!r}")


def _check_dims(shape, levels: int):
    if levels < 1:
        raise ParameterError(f"levels must be positive, got {levels}")
    div = 1 << levels
    h, w = shape
    if h % div or w % div:
        raise DimensionError(f"input {h}x{w} must have both dimensions divisible by {div} for {levels} levels")


def _haar_rows(a: np.ndarray) -> np.ndarray:
    even, odd = a[:, 0::2], a[:, 1::2]
    return np.hstack([(even + odd) / _SQRT2, (even - odd) / _SQRT2])


def _ihaar_rows(a: np.ndarray) -> np.ndarray:
    half = a.shape[1] // 2
    s, d = a[:, :half], a[:, half:]
    out = np.empty_like(a)
    out[:, 0::2] = (s + d) / _SQRT2
    out[:, 1::2] = (s - d) / _SQRT2
    return out


def dwt2_forward(img, levels: int = 2) -> DwtPyramid:
    """Separable Haar analysis (rows, then columns), recursing on ``LL``."""
    x = np.array(getattr(img, "pixels", img), dtype=np.float64)
    if x.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {x.shape}")
    _check_dims(x.shape, levels)
    h, w = x.shape
    for _ in range(levels):
        block = _haar_rows(x[:h, :w])
        x[:h, :w] = _haar_rows(block.T).T
        h, w = h // 2, w // 2
    return DwtPyramid(levels, x)


def dwt2_inverse(pyr: DwtPyramid) -> np.ndarray:
    x = np.array(pyr.layout, dtype=np.float64)
    _check_dims(x.shape, pyr.levels)
    H, W = x.shape
    for lev in range(pyr.levels, 0, -1):
        h, w = H >> (lev - 1), W >> (lev - 1)
        block = _ihaar_rows(x[:h, :w].T).T
        x[:h, :w] = _ihaar_rows(block)
    return x


def feature_length(height: int, width: int, levels: int, mode: SubbandSelection | str) -> int:
    mode = SubbandSelection(mode)
    deep = (height >> levels) * (width >> levels)
    if mode is SubbandSelection.ALL:
        return height * width
    if mode is SubbandSelection.LL_ONLY:
        return deep
    return 4 * deep


def extract_features(pyr: DwtPyramid, sel: SubbandSelection | str = SubbandSelection.ALL) -> np.ndarray:
    """Flatten selected subbands: deepest level first, ``LL, LH, HL, HH`` order, row-major inside."""
    sel = SubbandSelection(sel)
    parts = [pyr.band("LL")]
    if sel is not SubbandSelection.LL_ONLY:
        last = pyr.levels if sel is SubbandSelection.DEEPEST_LEVEL else 1
        for level in range(pyr.levels, last - 1, -1):
            parts += [pyr.band(name, level) for name in ("LH", "HL", "HH")]
    return np.concatenate([p.ravel() for p in parts])
