"""Symmetric eigendecomposition by cyclic Jacobi rotations.

Sweeps use the round-robin (tournament) ordering: every round rotates
``n // 2`` disjoint index pairs at once, so a round is a handful of vectorized
row/column updates and one sweep visits each off-diagonal pair exactly once.
"""
from __future__ import annotations

import numpy as np

from .errors import ConvergenceError, DimensionError


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a < n and b < n]
        p = np.array([a for a, _ in pairs], dtype=np.intp)
        q = np.array([b for _, b in pairs], dtype=np.intp)
        rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def jacobi_eigh(a, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and column eigenvectors of a symmetric matrix.

    Iteration stops once the off-diagonal Frobenius norm falls below
    ``tol * ||a||_F``.
    """
    a = np.array(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = float(np.linalg.norm(a))
    if n > 1 and scale > 0.0:
        rounds = _round_robin(n)
        for _ in range(max_sweeps):
            if _off_norm(a) <= tol * scale:
                break
            for p, q in rounds:
                apq = a[p, q]
                active = apq != 0.0
                if not active.any():
                    continue
                p, q, apq = p[active], q[active], apq[active]
                with np.errstate(over="ignore"):
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
                t[theta == 0.0] = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                ap, aq = a[:, p].copy(), a[:, q]
                a[:, p] = ap * c - aq * s
                a[:, q] = ap * s + aq * c
                ap, aq = a[p, :].copy(), a[q, :]
                a[p, :] = c[:, None] * ap - s[:, None] * aq
                a[q, :] = s[:, None] * ap + c[:, None] * aq
                a[p, q] = 0.0
                a[q, p] = 0.0

                vp, vq = v[:, p].copy(), v[:, q]
                v[:, p] = vp * c - vq * s
                v[:, q] = vp * s + vq * c
        else:
            if _off_norm(a) > tol * scale:
                raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]
