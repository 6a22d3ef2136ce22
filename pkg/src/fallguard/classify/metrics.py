"""Confusion matrix and the accuracy / precision / recall / F1 family."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..pose_stream import N_CLASSES
from .base import Classifier


class EmptyTestSet(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Rows are true classes, columns predicted classes."""

    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self, labels=None) -> str:
        n = self.counts.shape[0]
        labels = labels or [f"Pose{i + 1}" for i in range(n)]
        lines = ["true\\pred," + ",".join(labels)]
        for i in range(n):
            lines.append(labels[i] + "," + ",".join(str(int(v)) for v in self.counts[i]))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ClassMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class Metrics:
    """Macro-averaged scores plus a per-class breakdown.

    ``accuracy`` is the overall trace / total.  Per-class accuracy is the
    one-vs-rest (TP + TN) / total.  Macro means run over classes that occur
    in either the true or the predicted labels.
    """

    accuracy: float
    precision: float
    recall: float
    f1: float
    per_class: tuple[ClassMetrics, ...]
    averaging: str = "macro"

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "averaging": self.averaging,
            "per_class": [
                {
                    "class": f"Pose{i + 1}",
                    "accuracy": c.accuracy,
                    "precision": c.precision,
                    "recall": c.recall,
                    "f1": c.f1,
                    "support": c.support,
                }
                for i, c in enumerate(self.per_class)
            ],
        }


def confusion_matrix(y_true, y_pred, n_classes: int = N_CLASSES) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    return ConfusionMatrix(counts)


def _ratio(num, den):
    return float(num) / float(den) if den else 0.0


def metrics_from_confusion(cm: ConfusionMatrix) -> Metrics:
    counts = cm.counts
    total = cm.total
    if total == 0:
        raise EmptyTestSet("confusion matrix is empty")
    tp = np.diag(counts)
    fp = counts.sum(axis=0) - tp
    fn = counts.sum(axis=1) - tp
    tn = total - tp - fp - fn
    per_class = []
    for c in range(counts.shape[0]):
        p = _ratio(tp[c], tp[c] + fp[c])
        r = _ratio(tp[c], tp[c] + fn[c])
        f1 = 2 * p * r / (p + r) if (p + r) > 0 else 0.0
        acc = _ratio(tp[c] + tn[c], total)
        per_class.append(ClassMetrics(acc, p, r, f1, int(tp[c] + fn[c])))
    present = [c for c in range(counts.shape[0]) if tp[c] + fn[c] + fp[c] > 0]

    def macro(attr):
        return sum(getattr(per_class[c], attr) for c in present) / len(present)

    return Metrics(
        accuracy=_ratio(tp.sum(), total),
        precision=macro("precision"),
        recall=macro("recall"),
        f1=macro("f1"),
        per_class=tuple(per_class),
    )


def evaluate(model: Classifier, X, y) -> tuple[ConfusionMatrix, Metrics]:
    """Predict every row of ``X`` and score against class indices ``y``."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] == 0:
        raise EmptyTestSet("cannot evaluate on an empty test set")
    pred, _ = model.predict_batch(X)
    cm = confusion_matrix(y, pred, model.n_classes)
    return cm, metrics_from_confusion(cm)
