from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Dense ``n x d`` feature matrix with one integer class label per row."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y)
        if X.ndim != 2:
            raise DimensionError(f"X must be 2-D, got shape {X.shape}")
        if y.ndim != 1 or len(y) != X.shape[0]:
            raise DimensionError(f"y must be 1-D with {X.shape[0]} labels, got shape {y.shape}")
        if len(y) and not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.mod(y, 1) == 0):
                raise DimensionError("labels must be integers")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y.astype(np.int64))

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.y.max()) + 1 if len(self.y) else 0

    def subset(self, rows=None, cols=None) -> "LabeledDataset":
        X, y = self.X, self.y
        if rows is not None:
            X, y = X[rows], y[rows]
        if cols is not None:
            X = X[:, cols]
        return LabeledDataset(X, y)
