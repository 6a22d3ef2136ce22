"""Shared classifier surface."""

from __future__ import annotations

from typing import Protocol

import numpy as np

from ..pose_stream import PoseLabel


class FormatError(ValueError):
    """Model bytes are corrupt, of an unknown version, or mismatch the input."""


class Classifier(Protocol):
    """Anything with this surface plugs into evaluate/predict/save_model.

    SVM or boosting backends would implement the same two members.
    """

    n_features: int
    n_classes: int

    def predict_batch(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (class_index, confidence) arrays for the rows of ``X``."""
        ...


def check_features(model: Classifier, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise FormatError(
            f"model expects {model.n_features} features, input has shape {X.shape}"
        )
    return np.ascontiguousarray(X)


def predict(model: Classifier, fv: np.ndarray) -> tuple[PoseLabel, float]:
    """Classify a single feature vector."""
    idx, conf = model.predict_batch(np.asarray(fv, dtype=np.float64)[None, :])
    return PoseLabel.from_index(int(idx[0])), float(conf[0])
