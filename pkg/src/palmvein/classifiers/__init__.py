"""The four wrapper objective classifiers behind a common train/predict pair."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import ParameterError
from ..labeled import LabeledDataset
from .bayes import NbModel, nb_log_posterior, nb_predict, nb_train
from .knn import KnnModel, knn_predict, knn_train
from .svm import Kernel, SvmModel, smo, svm_decision, svm_predict, svm_train
from .tree import TreeNode, best_split, entropy, tree_predict, tree_train

CLASSIFIER_NAMES = ("knn", "svm", "nb", "dt")

_DEFAULTS: dict[str, dict[str, Any]] = {
    "knn": {"k": 1},
    "svm": {"kernel": "linear", "C_reg": 1.0, "gamma": None, "tol": 1e-3, "normalize": True},
    "nb": {},
    "dt": {"max_depth": 20, "min_samples": 2},
}


@dataclass(frozen=True)
class ClassifierSpec:
    """Classifier name plus hyperparameters, e.g. ``ClassifierSpec("svm", {"C_reg": 10})``."""

    name: str = "svm"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        name = self.name.lower()
        if name not in _DEFAULTS:
            raise ParameterError(f"unknown classifier {self.name!r}; choose from {CLASSIFIER_NAMES}")
        unknown = set(self.params) - set(_DEFAULTS[name])
        if unknown:
            raise ParameterError(f"unknown {name} parameters: {sorted(unknown)}")
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "params", {**_DEFAULTS[name], **self.params})

    def train(self, X: np.ndarray, y: np.ndarray):
        data = LabeledDataset(X, y)
        if self.name == "knn":
            return knn_train(data, **self.params)
        if self.name == "svm":
            return svm_train(data, **self.params)
        if self.name == "nb":
            return nb_train(data)
        return tree_train(data, **self.params)

    def predict(self, model, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.name == "knn":
            return knn_predict(model, X)
        if self.name == "svm":
            return svm_predict(model, X)
        if self.name == "nb":
            return nb_predict(model, X)
        return tree_predict(model, X)


__all__ = [
    "CLASSIFIER_NAMES",
    "ClassifierSpec",
    "Kernel",
    "KnnModel",
    "NbModel",
    "SvmModel",
    "TreeNode",
    "best_split",
    "entropy",
    "knn_predict",
    "knn_train",
    "nb_log_posterior",
    "nb_predict",
    "nb_train",
    "smo",
    "svm_decision",
    "svm_predict",
    "svm_train",
    "tree_predict",
    "tree_train",
]
