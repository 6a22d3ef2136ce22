"""Pose classifiers, stratified splitting and evaluation."""

from .base import Classifier, FormatError, predict
from .forest import (
    DecisionTree,
    EmptyTrainingSet,
    RandomForestModel,
    RandomForestParams,
    train_random_forest,
)
from .knn import KnnModel, train_knn
from .metrics import (
    ClassMetrics,
    ConfusionMatrix,
    EmptyTestSet,
    Metrics,
    confusion_matrix,
    evaluate,
    metrics_from_confusion,
)
from .model_io import FORMAT_VERSION, load_model, save_model
from .split import InsufficientClassSamples, stratified_split, stratified_split_indices

__all__ = [
    "Classifier",
    "ClassMetrics",
    "ConfusionMatrix",
    "DecisionTree",
    "EmptyTestSet",
    "EmptyTrainingSet",
    "FORMAT_VERSION",
    "FormatError",
    "InsufficientClassSamples",
    "KnnModel",
    "Metrics",
    "RandomForestModel",
    "RandomForestParams",
    "confusion_matrix",
    "evaluate",
    "load_model",
    "metrics_from_confusion",
    "predict",
    "save_model",
    "stratified_split",
    "stratified_split_indices",
    "train_knn",
    "train_random_forest",
]
