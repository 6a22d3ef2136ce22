"""Per-frame feature vectors: raw (x, y) coordinates, flattened."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .pose_stream import N_LANDMARKS, LabeledSample, LandmarkFrame

N_FEATURES = 2 * N_LANDMARKS

DEFAULT_MIN_VISIBILITY = 0.5
DEFAULT_MIN_VISIBLE = 25


@dataclass(frozen=True)
class Rejected:
    """Frame unusable for classification: too few visible landmarks."""

    visible: int
    required: int


def extract(
    frame: LandmarkFrame,
    min_visibility: float = DEFAULT_MIN_VISIBILITY,
    min_visible: int = DEFAULT_MIN_VISIBLE,
) -> np.ndarray | Rejected:
    """Return the 66-value vector (x0, y0, ..., x32, y32) or ``Rejected``.

    Coordinates are used as reported, with no centering or scaling, and
    low-visibility landmarks keep their coordinates.  The frame is rejected
    outright when fewer than ``min_visible`` landmarks have visibility of at
    least ``min_visibility``.
    """
    visible = int(np.count_nonzero(frame.points[:, 2] >= min_visibility))
    if visible < min_visible:
        return Rejected(visible, min_visible)
    vec = frame.points[:, :2].reshape(-1).copy()
    vec.flags.writeable = False
    return vec


def to_matrix(samples: Sequence[LabeledSample]) -> tuple[np.ndarray, np.ndarray]:
    """Stack samples into (X, y) with y holding zero-based class indices."""
    if not samples:
        return np.empty((0, N_FEATURES)), np.empty(0, dtype=np.int64)
    X = np.stack([s.frame.points[:, :2].reshape(-1) for s in samples])
    y = np.fromiter((s.label.index for s in samples), dtype=np.int64, count=len(samples))
    return X, y
