from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..pose_stream import N_CLASSES
from .base import check_features
from .forest import EmptyTrainingSet


@dataclass(frozen=True, eq=False)
class KnnModel:
    """Stores the training set; prediction is a Euclidean k-NN majority vote."""

    k: int
    X: np.ndarray
    y: np.ndarray
    n_classes: int = N_CLASSES

    @property
    def n_features(self) -> int:
        return int(self.X.shape[1])

    def predict_batch(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        Q = check_features(self, X)
        labels, votes = kernels.knn_vote(Q, self.X, self.y, self.k, self.n_classes)
        return labels, votes / self.k


def train_knn(X, y, k: int = 5, n_classes: int = N_CLASSES) -> KnnModel:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise EmptyTrainingSet("cannot train on an empty training set")
    if not 1 <= k <= X.shape[0]:
        raise ValueError(f"k must lie in 1..{X.shape[0]}, got {k}")
    X.flags.writeable = False
    y.flags.writeable = False
    return KnnModel(int(k), X, y, n_classes)
