"""Soft-margin SVM trained with sequential minimal optimization.

Each binary problem solves the dual

    max  sum(a) - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
    s.t. 0 <= a_i <= C,  sum(a_i y_i) = 0

two multipliers at a time.  The pair is chosen by the maximal-violating /
second-order rule and the loop stops once the KKT violation gap drops below
``tol``.  Multiclass problems use one-vs-rest; a two-class problem is a single
binary machine with the lower class on the positive side.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import DimensionError, ParameterError, TrainingError
from ..labeled import LabeledDataset

_TAU = 1e-12


@dataclass(frozen=True)
class Kernel:
    name: str = "linear"
    gamma: float | None = None

    def __post_init__(self):
        if self.name not in ("linear", "rbf"):
            raise ParameterError(f"unknown kernel {self.name!r}; use 'linear' or 'rbf'")
        if self.gamma is not None and not self.gamma > 0:
            raise ParameterError("rbf gamma must be positive")

    def __call__(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        if self.name == "linear":
            return A @ B.T
        sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * (A @ B.T)
        return np.exp(-self.gamma * np.maximum(sq, 0.0))


@dataclass(frozen=True, eq=False)
class BinarySvm:
    """Dual solution of one binary problem; ``alphas`` covers every training row."""

    alphas: np.ndarray
    y: np.ndarray
    b: float
    C: float

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.alphas > 0)


@dataclass(frozen=True, eq=False)
class SvmModel:
    """``X`` holds the training rows after the input map ``(x - shift) / scale``."""

    classes: np.ndarray
    X: np.ndarray
    kernel: Kernel
    machines: tuple[BinarySvm, ...]
    shift: np.ndarray | None = None
    scale: float = 1.0

    def transform(self, Q: np.ndarray) -> np.ndarray:
        if self.shift is None:
            return Q / self.scale
        return (Q - self.shift) / self.scale

    def linear_weights(self) -> np.ndarray:
        """Explicit primal weights ``w = sum a_i y_i x_i`` over mapped inputs (linear kernel only)."""
        if self.kernel.name != "linear":
            raise ParameterError("explicit weights exist only for the linear kernel")
        return np.stack([(m.alphas * m.y) @ self.X for m in self.machines])


@njit(cache=True)
def _smo_loop(K, y, C, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 1/2 a'Qa - e'a
    for _ in range(max_iter):
        # i: most violating index that may move up; m - M is the KKT gap
        i = -1
        m = -np.inf
        M = np.inf
        for t in range(n):
            v = -y[t] * grad[t]
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                if v > m:
                    m = v
                    i = t
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                if v < M:
                    M = v
        if i < 0 or m - M < tol:
            break
        # j: second-order choice among indices that may move down
        j = -1
        best = np.inf
        for t in range(n):
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                v = -y[t] * grad[t]
                if v < m:
                    gap = m - v
                    curv = K[i, i] + K[t, t] - 2.0 * K[i, t]
                    if curv <= 0.0:
                        curv = _TAU
                    score = -(gap * gap) / curv
                    if score < best:
                        best = score
                        j = t
        if j < 0:
            break

        curv = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if curv <= 0.0:
            curv = _TAU
        ai = alpha[i]
        aj = alpha[j]
        # move along the equality-constraint line, then clip so the variable that
        # leaves the box lands exactly on its bound (no C - ulp stragglers)
        if y[i] != y[j]:
            delta = (-grad[i] - grad[j]) / curv
            diff = ai - aj
            ai_new = ai + delta
            aj_new = aj + delta
            if diff > 0:
                if aj_new < 0:
                    aj_new = 0.0
                    ai_new = diff
            elif ai_new < 0:
                ai_new = 0.0
                aj_new = -diff
            if diff > 0:
                if ai_new > C:
                    ai_new = C
                    aj_new = C - diff
            elif aj_new > C:
                aj_new = C
                ai_new = C + diff
        else:
            delta = (grad[i] - grad[j]) / curv
            total = ai + aj
            ai_new = ai - delta
            aj_new = aj + delta
            if total > C:
                if ai_new > C:
                    ai_new = C
                    aj_new = total - C
            elif aj_new < 0:
                aj_new = 0.0
                ai_new = total
            if total > C:
                if aj_new > C:
                    aj_new = C
                    ai_new = total - C
            elif ai_new < 0:
                ai_new = 0.0
                aj_new = total
        d_i = ai_new - ai
        d_j = aj_new - aj
        if d_i == 0.0 and d_j == 0.0:
            break
        alpha[i] = ai_new
        alpha[j] = aj_new
        for t in range(n):
            grad[t] += y[t] * (K[t, i] * (y[i] * d_i) + K[t, j] * (y[j] * d_j))
    return alpha, grad


def smo(K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3, max_iter: int | None = None) -> BinarySvm:
    """Solve one binary dual problem given its Gram matrix and +/-1 labels."""
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    max_iter = max_iter or max(10_000_000, 100 * len(y))
    alpha, grad = _smo_loop(K, y, float(C), float(tol), int(max_iter))
    return BinarySvm(alphas=alpha, y=y, b=-_rho(alpha, y, grad, C), C=C)


def _rho(alpha, y, grad, C) -> float:
    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(yg[free].mean())
    at_hi = alpha >= C
    upper_side = (at_hi & (y < 0)) | (~at_hi & (y > 0))
    ub = yg[upper_side].min() if upper_side.any() else np.inf
    lb = yg[~upper_side].max() if (~upper_side).any() else -np.inf
    if np.isinf(ub):
        return float(lb)
    if np.isinf(lb):
        return float(ub)
    return float(0.5 * (ub + lb))


def svm_train(
    data: LabeledDataset,
    kernel: str | Kernel = "linear",
    C_reg: float = 1.0,
    gamma: float | None = None,
    tol: float = 1e-3,
    max_iter: int | None = None,
    normalize: bool = True,
) -> SvmModel:
    """One-vs-rest SVM; ``gamma`` defaults to ``1 / n_features`` for rbf.

    With ``normalize`` the inputs are centred and divided by one global
    constant so the mean squared row norm is 1.  Centring leaves both kernels'
    solutions unchanged (the dual constraint cancels any shift), and a single
    scale keeps the geometry; it only gives ``C_reg`` a meaning that does not
    depend on the units of the features.  Raw wavelet features have norms in
    the thousands, which puts ``C_reg = 1`` deep in the hard-margin regime
    where SMO needs millions of iterations on rank-deficient subsets.
    """
    if not C_reg > 0:
        raise ParameterError(f"C_reg must be positive, got {C_reg}")
    X = data.X
    shift, scale = None, 1.0
    if normalize:
        shift = X.mean(axis=0)
        X = X - shift
        rms = float(np.sqrt(np.mean(np.sum(X * X, axis=1))))
        if rms > 0:
            scale = rms
            X = X / scale
    if not isinstance(kernel, Kernel):
        kernel = Kernel(kernel, gamma)
    if kernel.name == "rbf" and kernel.gamma is None:
        kernel = Kernel("rbf", 1.0 / max(1, data.n_features))
    classes = np.unique(data.y)
    if len(classes) < 2:
        raise TrainingError(f"SVM needs at least two classes, got {classes.tolist()}")

    K = kernel(X, X)
    targets = classes[:1] if len(classes) == 2 else classes
    machines = tuple(
        smo(K, np.where(data.y == c, 1.0, -1.0), float(C_reg), tol, max_iter) for c in targets
    )
    return SvmModel(classes=classes, X=X, kernel=kernel, machines=machines, shift=shift, scale=scale)


def svm_decision(model: SvmModel, Q, explicit_weights: bool = False) -> np.ndarray:
    """Decision values ``sum a_i y_i K(x_i, q) + b``, shape ``(n_queries, n_machines)``."""
    Q = np.asarray(Q, dtype=np.float64)
    if Q.ndim != 2 or Q.shape[1] != model.X.shape[1]:
        raise DimensionError(f"expected {model.X.shape[1]} features, got shape {Q.shape}")
    b = np.array([m.b for m in model.machines])
    Q = model.transform(Q)
    if explicit_weights:
        return Q @ model.linear_weights().T + b
    coef = np.stack([m.alphas * m.y for m in model.machines], axis=1)
    return model.kernel(Q, model.X) @ coef + b


def svm_predict(model: SvmModel, q, explicit_weights: bool = False):
    """Class with the largest decision value; ties go to the lower class."""
    Q = np.asarray(q, dtype=np.float64)
    single = Q.ndim == 1
    f = svm_decision(model, Q[None, :] if single else Q, explicit_weights)
    if len(model.machines) == 1:
        idx = np.where(f[:, 0] >= 0, 0, 1)
    else:
        idx = np.argmax(f, axis=1)
    pred = model.classes[idx]
    return int(pred[0]) if single else pred
