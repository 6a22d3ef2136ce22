"""Fall confirmation: fall-pose persistence combined with a sustained motion drop.

A fall is confirmed at the first frame where the fall pose has been held
consecutively for more than ``pose_hold_secs`` and the motion metric has
stayed at or below ``motion_threshold`` for more than ``motion_drop_secs``.
After confirmation the detector stays quiet until a non-fall label re-arms it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .pose_stream import FALL_POSE, LandmarkFrame, PoseLabel


class NonMonotonicTimestamp(ValueError):
    pass


class Phase(str, enum.Enum):
    IDLE = "idle"
    FALL_POSE_HELD = "fall_pose_held"
    CONFIRMED = "confirmed"


@dataclass(frozen=True)
class FallDetectorConfig:
    fall_pose: PoseLabel = FALL_POSE
    pose_hold_secs: float = 3.0
    motion_drop_secs: float = 2.0
    motion_window_secs: float = 1.0
    # mean normalised displacement per second
    motion_threshold: float = 0.02
    min_confidence: float = 0.0
    # a longer stretch without a usable frame resets the detector
    max_gap_secs: float = 1.0

    def __post_init__(self):
        for name in ("pose_hold_secs", "motion_drop_secs", "motion_window_secs", "motion_threshold", "max_gap_secs"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValueError("min_confidence must lie in [0, 1]")
        if not isinstance(self.fall_pose, PoseLabel):
            object.__setattr__(self, "fall_pose", PoseLabel.parse(self.fall_pose))


@dataclass(frozen=True)
class FallEvent:
    confirmed_at: float
    held_since: float
    motion_value: float
    trigger_frame: LandmarkFrame

    @property
    def held_for(self) -> float:
        return self.confirmed_at - self.held_since


@dataclass(frozen=True, eq=False)
class DetectorState:
    phase: Phase = Phase.IDLE
    held_since: float | None = None
    confirmed_at: float | None = None
    low_motion_since: float | None = None
    motion_value: float = math.nan
    buffer_times: tuple[float, ...] = ()
    buffer_vecs: tuple[np.ndarray, ...] = field(default=(), repr=False)
    last_timestamp: float | None = None
    last_accepted: float | None = None


def motion_metric(times, vecs) -> float:
    """Mean over consecutive pairs of the mean keypoint displacement / dt.

    NaN (undefined) for fewer than two entries.
    """
    times = np.ascontiguousarray(times, dtype=np.float64)
    if times.shape[0] < 2:
        return math.nan
    return kernels.motion_rate(times, np.ascontiguousarray(np.stack(vecs), dtype=np.float64))


def _reset(state: DetectorState) -> DetectorState:
    return replace(
        state,
        phase=Phase.IDLE,
        held_since=None,
        confirmed_at=None,
        low_motion_since=None,
        motion_value=math.nan,
        buffer_times=(),
        buffer_vecs=(),
    )


def update(
    state: DetectorState,
    label: PoseLabel | None,
    confidence: float,
    frame: LandmarkFrame,
    cfg: FallDetectorConfig,
    features: np.ndarray | None = None,
) -> tuple[DetectorState, FallEvent | None]:
    """Advance the detector by one frame.

    ``label=None`` marks a frame rejected by feature extraction: it neither
    advances nor resets the timers, but a gap longer than ``max_gap_secs``
    since the last usable frame resets everything to idle.
    """
    now = frame.timestamp
    if state.last_timestamp is not None and now <= state.last_timestamp:
        raise NonMonotonicTimestamp(f"timestamp {now!r} does not follow {state.last_timestamp!r}")
    if state.last_accepted is not None and now - state.last_accepted > cfg.max_gap_secs:
        state = _reset(state)
    if label is None:
        return replace(state, last_timestamp=now), None

    vec = frame.xy.reshape(-1) if features is None else features
    times = state.buffer_times + (now,)
    vecs = state.buffer_vecs + (vec,)
    keep = 0
    while now - times[keep] > cfg.motion_window_secs:
        keep += 1
    times, vecs = times[keep:], vecs[keep:]
    motion = motion_metric(times, vecs)

    phase = state.phase
    held_since = state.held_since
    confirmed_at = state.confirmed_at
    event = None
    if label == cfg.fall_pose and confidence >= cfg.min_confidence:
        if phase is Phase.IDLE:
            phase, held_since = Phase.FALL_POSE_HELD, now
        # NaN (undefined motion) compares False, i.e. counts as not still
        if motion <= cfg.motion_threshold:
            low = state.low_motion_since if state.low_motion_since is not None else now
        else:
            low = None
        if (
            phase is Phase.FALL_POSE_HELD
            and now - held_since > cfg.pose_hold_secs
            and low is not None
            and now - low > cfg.motion_drop_secs
        ):
            phase, confirmed_at = Phase.CONFIRMED, now
            event = FallEvent(now, held_since, motion, frame)
    else:
        phase, held_since, confirmed_at, low = Phase.IDLE, None, None, None

    new = DetectorState(
        phase=phase,
        held_since=held_since,
        confirmed_at=confirmed_at,
        low_motion_since=low,
        motion_value=motion,
        buffer_times=times,
        buffer_vecs=vecs,
        last_timestamp=now,
        last_accepted=now,
    )
    return new, event


class FallMonitor:
    """Stateful wrapper around :func:`update` for one monitored stream."""

    def __init__(self, cfg: FallDetectorConfig | None = None):
        self.cfg = cfg or FallDetectorConfig()
        self.state = DetectorState()

    def step(self, label, confidence, frame, features=None) -> FallEvent | None:
        self.state, event = update(self.state, label, confidence, frame, self.cfg, features)
        return event
