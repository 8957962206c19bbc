from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, ParameterError
from ..labeled import LabeledDataset

# bound on elements of the (queries x train x features) difference block
_CHUNK_ELEMS = 1 << 22


@dataclass(frozen=True, eq=False)
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int = 1


def knn_train(data: LabeledDataset, k: int = 1) -> KnnModel:
    if data.n_samples < 1:
        raise ParameterError("KNN needs at least one training sample")
    if not 1 <= k <= data.n_samples:
        raise ParameterError(f"k must be in [1, {data.n_samples}], got {k}")
    return KnnModel(data.X, data.y, int(k))


def squared_distances(Q: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distances, computed from differences so ties stay ties."""
    out = np.empty((len(Q), len(X)))
    step = max(1, _CHUNK_ELEMS // max(1, X.size))
    for s in range(0, len(Q), step):
        diff = Q[s : s + step, None, :] - X[None, :, :]
        out[s : s + step] = np.einsum("qnd,qnd->qn", diff, diff)
    return out


def knn_predict(model: KnnModel, q):
    """Majority label of the ``k`` nearest training points.

    Equal distances favour the lower training index; a split vote goes to the
    tied class that appears first in distance order.
    """
    Q = np.asarray(q, dtype=np.float64)
    single = Q.ndim == 1
    Q = Q[None, :] if single else Q
    if Q.ndim != 2 or Q.shape[1] != model.X.shape[1]:
        raise DimensionError(f"expected {model.X.shape[1]} features, got shape {np.shape(q)}")
    d2 = squared_distances(Q, model.X)
    nearest = np.argsort(d2, axis=1, kind="stable")[:, : model.k]
    labels = model.y[nearest]
    if model.k == 1:
        pred = labels[:, 0]
    else:
        pred = np.empty(len(Q), dtype=model.y.dtype)
        for r, row in enumerate(labels):
            classes, first, counts = np.unique(row, return_index=True, return_counts=True)
            tied = counts == counts.max()
            pred[r] = classes[tied][np.argmin(first[tied])]
    return int(pred[0]) if single else pred
