from __future__ import annotations

import math
from typing import Sequence, TypeVar

import numpy as np

T = TypeVar("T")


class InsufficientClassSamples(ValueError):
    pass


def stratified_split_indices(
    labels: Sequence[int], test_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-class seeded shuffle; each class sends round(fraction * count) to test.

    The test share is clamped to [1, count - 1] so both sides see every class.
    Returned index arrays are sorted, so input order is preserved.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction!r}")
    labels = np.asarray(labels)
    rng = np.random.default_rng(_seed_entropy(seed))
    test_parts = []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if members.size < 2:
            raise InsufficientClassSamples(
                f"class {cls} has {members.size} sample(s), need at least 2"
            )
        n_test = math.floor(test_fraction * members.size + 0.5)
        n_test = min(max(n_test, 1), members.size - 1)
        test_parts.append(rng.permutation(members)[:n_test])
    test = np.sort(np.concatenate(test_parts)) if test_parts else np.empty(0, np.int64)
    mask = np.ones(labels.size, dtype=bool)
    mask[test] = False
    return np.flatnonzero(mask), test


def stratified_split(samples, test_fraction: float = 0.2, seed: int = 0):
    """Split labeled samples into (train, test) lists, stratified by label."""
    train_idx, test_idx = stratified_split_indices(
        [int(s.label) for s in samples], test_fraction, seed
    )
    return [samples[i] for i in train_idx], [samples[i] for i in test_idx]


def _seed_entropy(seed: int) -> int:
    return int(seed) & 0xFFFF_FFFF_FFFF_FFFF
