from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, InsufficientDataError
from ..labeled import LabeledDataset


@dataclass(frozen=True, eq=False)
class NbModel:
    """Per-class priors and per-feature Gaussian mean/variance."""

    classes: np.ndarray
    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    epsilon: float


def nb_train(data: LabeledDataset) -> NbModel:
    if data.n_samples == 0:
        raise InsufficientDataError("cannot fit naive Bayes on an empty dataset")
    X, y = data.X, data.y
    classes, counts = np.unique(y, return_counts=True)
    means = np.stack([X[y == c].mean(axis=0) for c in classes])
    variances = np.stack([X[y == c].var(axis=0) for c in classes])
    top = float(X.var(axis=0).max()) if X.shape[1] else 0.0
    epsilon = 1e-9 * (top if top > 0 else 1e-9)
    return NbModel(
        classes=classes,
        priors=counts / counts.sum(),
        means=means,
        variances=np.maximum(variances, epsilon),
        epsilon=epsilon,
    )


def nb_log_posterior(model: NbModel, Q) -> np.ndarray:
    """Unnormalised log P(y | x) for each query row and class (columns follow ``model.classes``)."""
    Q = np.asarray(Q, dtype=np.float64)
    if Q.ndim != 2 or Q.shape[1] != model.means.shape[1]:
        raise DimensionError(f"expected {model.means.shape[1]} features, got shape {Q.shape}")
    out = np.empty((len(Q), len(model.classes)))
    for j in range(len(model.classes)):
        var = model.variances[j]
        ll = -0.5 * np.log(2 * np.pi * var) - (Q - model.means[j]) ** 2 / (2 * var)
        out[:, j] = np.log(model.priors[j]) + ll.sum(axis=1)
    return out


def nb_predict(model: NbModel, q):
    Q = np.asarray(q, dtype=np.float64)
    single = Q.ndim == 1
    scores = nb_log_posterior(model, Q[None, :] if single else Q)
    pred = model.classes[np.argmax(scores, axis=1)]
    return int(pred[0]) if single else pred
