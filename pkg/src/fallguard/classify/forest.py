"""Random forest of Gini decision trees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..features import N_FEATURES
from ..pose_stream import N_CLASSES
from .base import check_features
from .split import _seed_entropy


class EmptyTrainingSet(ValueError):
    pass


@dataclass(frozen=True)
class RandomForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    features_per_split: int = math.ceil(math.sqrt(N_FEATURES))

    def validate(self, n_features: int = N_FEATURES) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be positive")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be positive or None")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be at least 2")
        if not 1 <= self.features_per_split <= n_features:
            raise ValueError(f"features_per_split must lie in 1..{n_features}")

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "features_per_split": self.features_per_split,
        }


@dataclass(frozen=True, eq=False)
class DecisionTree:
    """Flat array layout; node 0 is the root and ``left[i] == -1`` marks a leaf.

    ``counts[i]`` holds the bootstrap class counts that reached node ``i``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray
    leaf_class: np.ndarray = field(init=False)

    def __post_init__(self):
        # lowest class index wins ties
        object.__setattr__(self, "leaf_class", np.argmax(self.counts, axis=1).astype(np.int64))

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    def is_leaf(self, node: int) -> bool:
        return self.left[node] < 0

    def depth(self) -> int:
        best = 0
        stack = [(0, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if not self.is_leaf(node):
                stack.append((int(self.left[node]), d + 1))
                stack.append((int(self.right[node]), d + 1))
        return best

    def apply(self, X: np.ndarray) -> np.ndarray:
        return kernels.tree_predict(
            X, self.feature, self.threshold, self.left, self.right, self.leaf_class
        )


@dataclass(frozen=True, eq=False)
class RandomForestModel:
    trees: tuple[DecisionTree, ...]
    params: RandomForestParams
    seed: int
    n_features: int = N_FEATURES
    n_classes: int = N_CLASSES

    def votes(self, X: np.ndarray) -> np.ndarray:
        X = check_features(self, X)
        votes = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            votes[rows, tree.apply(X)] += 1
        return votes

    def predict_batch(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        votes = self.votes(X)
        best = np.argmax(votes, axis=1)
        conf = votes[np.arange(votes.shape[0]), best] / len(self.trees)
        return best.astype(np.int64), conf


def _grow_tree(X, y, sample, params, n_classes, seed, tree_index) -> DecisionTree:
    feature, threshold, left, right, counts = [], [], [], [], []
    max_depth = params.max_depth if params.max_depth is not None else math.inf
    # (indices, depth, path bits, parent node, is_left); preorder
    stack = [(sample, 0, (), -1, False)]
    while stack:
        idx, depth, path, parent, is_left = stack.pop()
        node = len(feature)
        if parent >= 0:
            (left if is_left else right)[parent] = node
        node_counts = np.bincount(y[idx], minlength=n_classes)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(node_counts)

        if (
            idx.size < params.min_samples_split
            or depth >= max_depth
            or np.count_nonzero(node_counts) <= 1
        ):
            continue
        # node RNG is keyed by the path, so a shallower tree is a truncation
        # of a deeper one grown from the same seed
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(tree_index, 1, *path))
        )
        order = rng.permutation(X.shape[1]).astype(np.int64)
        f, thr, _ = kernels.best_split(X, y, idx, order, params.features_per_split, n_classes)
        if f < 0:
            continue
        feature[node] = f
        threshold[node] = thr
        go_left = X[idx, f] <= thr
        stack.append((idx[~go_left], depth + 1, path + (1,), node, False))
        stack.append((idx[go_left], depth + 1, path + (0,), node, True))

    return DecisionTree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        counts=np.asarray(counts, dtype=np.int64).reshape(-1, n_classes),
    )


def train_random_forest(
    X: np.ndarray,
    y: np.ndarray,
    params: RandomForestParams | None = None,
    seed: int = 0,
    n_classes: int = N_CLASSES,
) -> RandomForestModel:
    """Fit a forest; every tree sees its own bootstrap and RNG stream."""
    params = params or RandomForestParams()
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise EmptyTrainingSet("cannot train on an empty training set")
    params.validate(X.shape[1])
    entropy = _seed_entropy(seed)
    n = X.shape[0]
    trees = []
    for t in range(params.n_trees):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=entropy, spawn_key=(t, 0)))
        sample = rng.integers(0, n, size=n)
        trees.append(_grow_tree(X, y, sample, params, n_classes, entropy, t))
    return RandomForestModel(tuple(trees), params, int(seed), X.shape[1], n_classes)
