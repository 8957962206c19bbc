"""Entropy-based decision tree (greedy, binary splits on midpoints)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..errors import DimensionError, ParameterError
from ..labeled import LabeledDataset

@dataclass(frozen=True, eq=False)
class TreeNode:
    label: int | None = None
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    @property
    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth, self.right.depth)


def entropy(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


@njit(cache=True)
def _scan_features(XT, y, order, member, n, n_classes, parent, clogc):
    # XT is features x samples and order holds each feature's presorted row
    # indices; rows outside the node are skipped, so a feature costs one sweep.
    # n*H(split) = nl log nl - sum cl log cl + nr log nr - sum cr log cr, kept
    # incrementally through the table clogc[c] = c log2 c.
    d, n_all = XT.shape
    best_gain = 0.0
    best_f = -1
    best_thr = 0.0
    total = np.zeros(n_classes, dtype=np.int64)
    for r in range(n_all):
        if member[r]:
            total[y[r]] += 1
    s_total = 0.0
    for c in range(n_classes):
        s_total += clogc[total[c]]
    left = np.empty(n_classes, dtype=np.int64)
    rows = np.empty(n, dtype=np.int64)
    for f in range(d):
        m = 0
        for t in range(n_all):
            r = order[f, t]
            if member[r]:
                rows[m] = r
                m += 1
        left[:] = 0
        s_left = 0.0
        s_right = s_total
        f_gain = -np.inf
        f_k = -1
        for k in range(n - 1):
            c = y[rows[k]]
            cl = left[c]
            cr = total[c] - cl
            s_left += clogc[cl + 1] - clogc[cl]
            s_right += clogc[cr - 1] - clogc[cr]
            left[c] = cl + 1
            if not XT[f, rows[k]] < XT[f, rows[k + 1]]:
                continue
            nl = k + 1
            g = parent - (clogc[nl] - s_left + clogc[n - nl] - s_right) / n
            if g > f_gain + 1e-12:
                f_gain = g
                f_k = k
        if f_k >= 0 and f_gain > best_gain + 1e-12:
            lo = XT[f, rows[f_k]]
            hi = XT[f, rows[f_k + 1]]
            thr = 0.5 * (lo + hi)
            if not thr < hi:
                thr = lo
            best_gain = f_gain
            best_f = f
            best_thr = thr
    return best_gain, best_f, best_thr


def _presort(XT: np.ndarray) -> np.ndarray:
    return np.argsort(XT, axis=1, kind="stable")


def _split(XT, y, order, member, n_classes) -> tuple[float, int, float]:
    n = int(member.sum())
    if n < 2:
        return (0.0, -1, 0.0)
    parent = entropy(np.bincount(y[member], minlength=n_classes))
    counts = np.arange(XT.shape[1] + 1, dtype=np.float64)
    clogc = counts * np.log2(np.maximum(counts, 1.0))
    gain, f, thr = _scan_features(XT, y, order, member, n, int(n_classes), parent, clogc)
    return float(gain), int(f), float(thr)


def best_split(X: np.ndarray, y: np.ndarray, n_classes: int) -> tuple[float, int, float]:
    """Return ``(gain, feature, threshold)`` of the highest-gain split.

    Ties go to the lowest feature index, then the lowest threshold.  Gain is 0
    with feature -1 when no split separates any two samples.
    """
    XT = np.ascontiguousarray(np.asarray(X, dtype=np.float64).T)
    y = np.asarray(y, dtype=np.int64)
    return _split(XT, y, _presort(XT), np.ones(len(y), dtype=np.bool_), n_classes)


def tree_train(data: LabeledDataset, max_depth: int = 20, min_samples: int = 2) -> TreeNode:
    if max_depth < 1 or min_samples < 1:
        raise ParameterError("max_depth and min_samples must be positive")
    if data.n_samples < 1:
        raise ParameterError("decision tree needs at least one sample")
    n_classes = int(data.y.max()) + 1
    XT = np.ascontiguousarray(data.X.T)
    order = _presort(XT)

    def grow(rows: np.ndarray, depth: int) -> TreeNode:
        y = data.y[rows]
        counts = np.bincount(y, minlength=n_classes)
        majority = int(np.argmax(counts))
        if depth >= max_depth or len(rows) < min_samples or np.count_nonzero(counts) == 1:
            return TreeNode(label=majority)
        member = np.zeros(data.n_samples, dtype=np.bool_)
        member[rows] = True
        gain, feature, thr = _split(XT, data.y, order, member, n_classes)
        if feature < 0 or gain <= 1e-12:
            return TreeNode(label=majority)
        go_left = data.X[rows, feature] <= thr
        return TreeNode(
            feature=feature,
            threshold=thr,
            left=grow(rows[go_left], depth + 1),
            right=grow(rows[~go_left], depth + 1),
        )

    return grow(np.arange(data.n_samples), 0)


def tree_predict(model: TreeNode, q, n_features: int | None = None):
    """Descend the tree; a value equal to the threshold goes left."""
    Q = np.asarray(q, dtype=np.float64)
    single = Q.ndim == 1
    Q = Q[None, :] if single else Q
    if Q.ndim != 2 or (n_features is not None and Q.shape[1] != n_features):
        raise DimensionError(f"expected {n_features} features, got shape {np.shape(q)}")
    out = np.empty(len(Q), dtype=np.int64)
    for r, row in enumerate(Q):
        node = model
        while not node.is_leaf:
            if node.feature >= len(row):
                raise DimensionError(f"query has {len(row)} features but the tree splits on feature {node.feature}")
            node = node.left if row[node.feature] <= node.threshold else node.right
        out[r] = node.label
    return int(out[0]) if single else out
