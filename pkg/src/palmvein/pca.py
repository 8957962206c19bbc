"""Principal component analysis used to strip redundancy from wavelet features."""
from __future__ import annotations

import numbers
from dataclasses import dataclass

import numpy as np

from .eigen import jacobi_eigh
from .errors import DimensionError, InsufficientDataError, ParameterError
from .labeled import LabeledDataset


@dataclass(frozen=True, eq=False)
class PcaModel:
    """Fitted projection.

    ``components`` holds one orthonormal direction per row, ordered by
    non-increasing ``eigenvalues`` (sample covariance, divisor ``n - 1``).
    """

    mean: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray
    total_variance: float

    @property
    def k(self) -> int:
        return self.components.shape[0]

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def explained_fraction(self) -> np.ndarray:
        if self.total_variance <= 0.0:
            return np.zeros(self.k)
        return np.cumsum(self.eigenvalues) / self.total_variance


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vectors), axis=1)
    signs = np.sign(vectors[np.arange(len(vectors)), idx])
    signs[signs == 0] = 1.0
    return vectors * signs[:, None]


def _spectrum(Xc: np.ndarray, method: str) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and feature-space eigenvectors (rows) of the sample covariance."""
    n, d = Xc.shape
    if method == "auto":
        method = "covariance" if d <= n else "gram"
    if method == "covariance":
        w, v = jacobi_eigh(Xc.T @ Xc / (n - 1))
        return w, v.T
    if method == "gram":
        w, u = jacobi_eigh(Xc @ Xc.T / (n - 1))
        vecs = (Xc.T @ u).T
        norms = np.linalg.norm(vecs, axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            vecs = np.where(norms[:, None] > 0, vecs / norms[:, None], 0.0)
        return w, vecs
    raise ParameterError(f"unknown PCA method {method!r}")


def pca_fit(X, retain: int | float = 0.95, method: str = "auto") -> PcaModel:
    """Fit PCA keeping either ``retain`` components (int) or the smallest
    number of components whose cumulative variance fraction reaches
    ``retain`` (float in (0, 1]).

    ``method`` picks the eigenproblem: ``"covariance"`` (d x d), ``"gram"``
    (n x n inner products, for d > n) or ``"auto"``.
    """
    X = np.asarray(getattr(X, "X", X), dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"X must be 2-D, got shape {X.shape}")
    n, d = X.shape
    if n < 2:
        raise InsufficientDataError(f"PCA needs at least 2 samples, got {n}")
    if d < 1:
        raise InsufficientDataError("PCA needs at least one feature")
    by_count = isinstance(retain, numbers.Integral) and not isinstance(retain, bool)
    if by_count and retain < 1:
        raise ParameterError(f"component count must be positive, got {retain}")
    if not by_count and not 0.0 < float(retain) <= 1.0:
        raise ParameterError(f"variance fraction must lie in (0, 1], got {retain}")

    mean = X.mean(axis=0)
    Xc = X - mean
    w, vecs = _spectrum(Xc, method)

    # rounding-level eigenvalues (including small negatives) are exact zeros
    floor = max(n, d) * np.finfo(float).eps * max(w[0], 0.0) * 10
    w = np.where(w > floor, w, 0.0)
    rank = int(np.count_nonzero(w))
    total = float(w.sum())

    if by_count:
        k = int(retain)
    elif total == 0.0:
        k = 0
    else:
        frac = np.cumsum(w) / total
        k = int(np.searchsorted(frac, float(retain) - 1e-12, side="left")) + 1
    k = min(k, rank, n - 1, d)

    components = _fix_signs(vecs[:k]) if k else np.zeros((0, d))
    return PcaModel(mean=mean, components=components, eigenvalues=w[:k].copy(), total_variance=total)


def pca_project(model: PcaModel, X):
    """Centre on the training mean and project onto the retained components.

    A :class:`LabeledDataset` comes back as a dataset with the same labels.
    """
    if isinstance(X, LabeledDataset):
        return LabeledDataset(pca_project(model, X.X), X.y)
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    X2 = X[None, :] if single else X
    if X2.ndim != 2 or X2.shape[1] != model.dim:
        raise DimensionError(f"expected {model.dim} features per sample, got shape {X.shape}")
    out = (X2 - model.mean) @ model.components.T
    return out[0] if single else out


def pca_reconstruct(model: PcaModel, Z) -> np.ndarray:
    """Map projected coordinates back to feature space."""
    return np.asarray(Z, dtype=np.float64) @ model.components + model.mean
