"""Wrapper feature selection driven by the particle swarm.

A particle position in ``[-5, 5]^d`` becomes a feature mask through the
sigmoid transfer function: feature ``i`` is kept when
``sigmoid(position[i]) >= threshold``.  A mask is scored by the mean accuracy
of the chosen classifier over stratified folds that stay fixed for the whole
search.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field, replace

import numpy as np

from .classifiers import ClassifierSpec
from .errors import DimensionError, ParameterError
from .labeled import LabeledDataset
from .pso import SwarmConfig, pso_run


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))


@dataclass(frozen=True)
class SelectionConfig:
    threshold: float = 0.5
    classifier: ClassifierSpec = field(default_factory=ClassifierSpec)
    folds: int = 5
    swarm: SwarmConfig = field(default_factory=SwarmConfig)
    scheme: str = "cv"  # or "holdout"
    holdout_fraction: float = 0.3

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ParameterError(f"threshold must lie in (0, 1), got {self.threshold}")
        if self.scheme not in ("cv", "holdout"):
            raise ParameterError(f"scheme must be 'cv' or 'holdout', got {self.scheme!r}")
        if self.scheme == "cv" and self.folds < 2:
            raise ParameterError(f"folds must be >= 2, got {self.folds}")
        if not 0.0 < self.holdout_fraction < 1.0:
            raise ParameterError("holdout_fraction must lie in (0, 1)")

    @property
    def cutoff(self) -> float:
        """Position value at which the sigmoid reaches ``threshold``."""
        return math.log(self.threshold / (1.0 - self.threshold))


@dataclass(frozen=True, eq=False)
class FeatureMask:
    bits: np.ndarray

    @property
    def selected_count(self) -> int:
        return int(np.count_nonzero(self.bits))

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def __len__(self):
        return len(self.bits)


@dataclass(frozen=True, eq=False)
class CvSplit:
    """Per-sample fold index; ``-1`` marks rows that are always in training (holdout mode)."""

    assignment: np.ndarray
    n_folds: int

    def pairs(self):
        for f in range(self.n_folds):
            test = self.assignment == f
            yield np.flatnonzero(~test), np.flatnonzero(test)


def stratified_split(y, folds: int, seed) -> CvSplit:
    """Deal each class's shuffled samples round-robin across folds.

    The starting fold carries over from one class to the next so fold sizes
    stay balanced overall as well as per class.
    """
    y = np.asarray(y)
    if folds < 2:
        raise ParameterError(f"folds must be >= 2, got {folds}")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(y), dtype=np.int64)
    offset = 0
    for c in np.unique(y):
        rows = rng.permutation(np.flatnonzero(y == c))
        assignment[rows] = (offset + np.arange(len(rows))) % folds
        offset = (offset + len(rows)) % folds
    return CvSplit(assignment, folds)


def holdout_split(y, fraction: float, seed) -> CvSplit:
    """Hold out ``fraction`` of every class (at least one sample when it has two or more)."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    assignment = np.full(len(y), -1, dtype=np.int64)
    for c in np.unique(y):
        rows = rng.permutation(np.flatnonzero(y == c))
        take = min(len(rows) - 1, max(1, int(round(fraction * len(rows)))))
        assignment[rows[:take]] = 0
    return CvSplit(assignment, 1)


def make_split(y, cfg: SelectionConfig) -> CvSplit:
    seed = (cfg.swarm.seed, 1)
    if cfg.scheme == "holdout":
        return holdout_split(y, cfg.holdout_fraction, seed)
    return stratified_split(y, cfg.folds, seed)


def decode_mask(position, cfg: SelectionConfig | None = None) -> FeatureMask:
    cfg = cfg or SelectionConfig()
    # sigmoid(x) >= t  <=>  x >= logit(t); comparing positions avoids rounding at the cutoff
    return FeatureMask(np.asarray(position, dtype=np.float64) >= cfg.cutoff)


def accuracy(pred, truth) -> float:
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise DimensionError(f"label vectors differ in shape: {pred.shape} vs {truth.shape}")
    if len(pred) == 0:
        raise DimensionError("accuracy of an empty label vector is undefined")
    return float(np.mean(pred == truth))


def fitness(mask: FeatureMask, data: LabeledDataset, split: CvSplit, cfg: SelectionConfig) -> float:
    """Mean held-out accuracy of the classifier restricted to the masked features."""
    if len(mask) != data.n_features:
        raise DimensionError(f"mask has {len(mask)} bits for {data.n_features} features")
    if mask.selected_count == 0:
        return 0.0
    X = data.X[:, mask.bits]
    clf = cfg.classifier
    scores = []
    for train, test in split.pairs():
        if len(test) == 0:
            continue
        model = clf.train(X[train], data.y[train])
        scores.append(accuracy(clf.predict(model, X[test]), data.y[test]))
    return float(np.mean(scores))


@dataclass
class SelectionResult:
    mask: FeatureMask
    fitness: float
    history: list[float]
    baseline_fitness: float
    evaluations: int

    def __iter__(self):
        return iter((self.mask, self.fitness, self.history))


def select_features(data: LabeledDataset, cfg: SelectionConfig | None = None, split: CvSplit | None = None) -> SelectionResult:
    """Search feature subsets with the swarm; returns the best mask found.

    Among masks sharing the best fitness the one with fewer features wins;
    remaining ties go to the lexicographically smallest bit pattern.  The
    empty mask is never returned; if the swarm only ever visits it, the
    all-features mask is returned instead.
    ``baseline_fitness`` is the score of the all-features mask under the same
    folds.
    """
    cfg = cfg or SelectionConfig()
    if data.n_features < 1:
        raise DimensionError("feature selection needs at least one feature")
    split = split or make_split(data.y, cfg)
    cache: dict[bytes, float] = {}
    best: dict = {"rank": None}
    lock = threading.Lock()

    def score(bits: np.ndarray) -> float:
        key = np.packbits(bits).tobytes()
        if key not in cache:
            cache[key] = fitness(FeatureMask(bits), data, split, cfg)
        return cache[key]

    def objective(position: np.ndarray) -> float:
        bits = decode_mask(position, cfg).bits
        value = score(bits)
        if not bits.any():
            return value
        # order-free ranking so threaded evaluation picks the same winner
        rank = (value, -int(bits.sum()), tuple(~np.packbits(bits)))
        with lock:
            if best["rank"] is None or rank > best["rank"]:
                best["rank"], best["bits"] = rank, bits.copy()
        return value

    result = pso_run(cfg.swarm, data.n_features, objective)
    all_bits = np.ones(data.n_features, dtype=bool)
    baseline = score(all_bits)
    if best["rank"] is None:
        # every visited position decoded to the empty mask
        best["rank"], best["bits"] = (baseline,), all_bits
    return SelectionResult(
        mask=FeatureMask(best["bits"]),
        fitness=best["rank"][0],
        history=result.history,
        baseline_fitness=baseline,
        evaluations=len(cache),
    )


def with_seed(cfg: SelectionConfig, seed: int) -> SelectionConfig:
    return replace(cfg, swarm=replace(cfg.swarm, seed=seed))
