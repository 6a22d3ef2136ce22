"""Synthetic skeletons: labeled datasets and scripted temporal scenarios.

The twelve class templates live in ``data/templates.json`` (regenerate with
``scripts/build_templates.py``).  Class identities are our own assignment:

    Pose1 standing           Pose7  lying on a bed (intentional)
    Pose2 walking            Pose8  losing balance
    Pose3 sitting on chair   Pose9  mid-fall
    Pose4 bending forward    Pose10 sitting on floor after impact
    Pose5 squatting          Pose11 kneeling
    Pose6 prone on floor     Pose12 on hands and knees
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .pose_stream import N_LANDMARKS, LabeledSample, LandmarkFrame, PoseLabel

TEMPLATE_NAMES = {
    PoseLabel.POSE1: "standing",
    PoseLabel.POSE2: "walking",
    PoseLabel.POSE3: "sitting on chair",
    PoseLabel.POSE4: "bending forward",
    PoseLabel.POSE5: "squatting",
    PoseLabel.POSE6: "prone on floor",
    PoseLabel.POSE7: "lying on bed",
    PoseLabel.POSE8: "losing balance",
    PoseLabel.POSE9: "mid-fall",
    PoseLabel.POSE10: "sitting on floor",
    PoseLabel.POSE11: "kneeling",
    PoseLabel.POSE12: "hands and knees",
}

DEFAULT_JITTER = 0.015
# per-frame sensor noise for scenarios; kept well under the default motion
# threshold so that a still subject reads as still
DEFAULT_SCENARIO_JITTER = 0.0005


def load_templates(path: str | Path | None = None) -> dict[PoseLabel, np.ndarray]:
    """Load the label -> (33, 2) template map (packaged fixture by default)."""
    if path is None:
        return dict(_packaged_templates())
    with open(path) as fh:
        return _parse_templates(json.load(fh))


@lru_cache(maxsize=1)
def _packaged_templates():
    text = resources.files("fallguard").joinpath("data/templates.json").read_text()
    return tuple(_parse_templates(json.loads(text)).items())


def _parse_templates(raw: dict) -> dict[PoseLabel, np.ndarray]:
    out = {}
    for key, pts in raw.items():
        arr = np.asarray(pts, dtype=np.float64)
        if arr.shape != (N_LANDMARKS, 2):
            raise ValueError(f"template {key}: expected {N_LANDMARKS} [x, y] pairs")
        arr.flags.writeable = False
        out[PoseLabel.parse(key)] = arr
    missing = set(PoseLabel) - set(out)
    if missing:
        raise ValueError(f"templates missing for {sorted(str(m) for m in missing)}")
    return {lab: out[lab] for lab in PoseLabel}


def template_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Mean Euclidean distance between corresponding landmarks."""
    a = np.asarray(a).reshape(N_LANDMARKS, 2)
    b = np.asarray(b).reshape(N_LANDMARKS, 2)
    return float(np.linalg.norm(a - b, axis=1).mean())


def generate_dataset(
    per_class: int,
    seed: int = 0,
    jitter_scale: float = DEFAULT_JITTER,
    templates: dict[PoseLabel, np.ndarray] | None = None,
) -> list[LabeledSample]:
    """``per_class`` jittered copies of each template, class-major order."""
    if per_class < 1:
        raise ValueError("per_class must be at least 1")
    templates = templates or load_templates()
    rng = np.random.default_rng(seed)
    samples = []
    t = 0
    for label in PoseLabel:
        base = templates[label]
        xy = base + rng.normal(0.0, jitter_scale, size=(per_class, N_LANDMARKS, 2))
        xy = np.nan_to_num(xy, nan=0.0, posinf=0.0, neginf=0.0)
        vis = rng.uniform(0.7, 1.0, size=(per_class, N_LANDMARKS, 1))
        pts = np.concatenate([xy, vis], axis=2)
        for i in range(per_class):
            samples.append(LabeledSample(LandmarkFrame(float(t), pts[i]), label))
            t += 1
    return samples


# --------------------------------------------------------------------------
# scenarios


@dataclass(frozen=True)
class Segment:
    label: PoseLabel
    duration: float
    motion_amplitude: float = 0.0


@dataclass(frozen=True)
class ScenarioScript:
    segments: tuple[Segment, ...]
    frame_rate: float = 10.0
    jitter_scale: float = DEFAULT_SCENARIO_JITTER
    transition_secs: float = 0.3
    oscillation_hz: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("a scenario needs at least one segment")
        if not self.frame_rate > 0:
            raise ValueError("frame_rate must be positive")
        for seg in self.segments:
            if not seg.duration > 0:
                raise ValueError("segment durations must be positive")
            if seg.motion_amplitude < 0:
                raise ValueError("motion_amplitude must be non-negative")

    @property
    def duration(self) -> float:
        return sum(s.duration for s in self.segments)

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioScript":
        segs = tuple(
            Segment(PoseLabel.parse(s["class"]), float(s["duration"]), float(s.get("motion_amplitude", 0.0)))
            for s in raw["segments"]
        )
        extra = {k: float(raw[k]) for k in ("frame_rate", "jitter_scale", "transition_secs", "oscillation_hz") if k in raw}
        return cls(segs, **extra)

    def to_dict(self) -> dict:
        return {
            "segments": [
                {"class": str(s.label), "duration": s.duration, "motion_amplitude": s.motion_amplitude}
                for s in self.segments
            ],
            "frame_rate": self.frame_rate,
            "jitter_scale": self.jitter_scale,
            "transition_secs": self.transition_secs,
            "oscillation_hz": self.oscillation_hz,
        }


@dataclass(frozen=True)
class SegmentAnnotation:
    label: PoseLabel
    start: float
    end: float

    def to_dict(self) -> dict:
        return {"class": str(self.label), "start": self.start, "end": self.end}


@dataclass
class Scenario:
    frames: list[LandmarkFrame]
    annotations: list[SegmentAnnotation] = field(default_factory=list)

    def label_at(self, t: float) -> PoseLabel:
        for a in self.annotations:
            if a.start <= t < a.end:
                return a.label
        return self.annotations[-1].label


def generate_scenario(
    script: ScenarioScript,
    seed: int = 0,
    templates: dict[PoseLabel, np.ndarray] | None = None,
) -> Scenario:
    """Render a script into frames plus ground-truth segment intervals.

    Each landmark oscillates smoothly with the segment's motion amplitude on
    top of its template position; entering a segment blends template and
    amplitude from the previous segment over ``transition_secs``.
    """
    templates = templates or load_templates()
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=(N_LANDMARKS, 2))

    starts = np.cumsum([0.0] + [s.duration for s in script.segments])
    annotations = [
        SegmentAnnotation(seg.label, float(starts[i]), float(starts[i + 1]))
        for i, seg in enumerate(script.segments)
    ]
    n_frames = int(round(script.duration * script.frame_rate))
    omega = 2.0 * math.pi * script.oscillation_hz
    frames = []
    seg_i = 0
    for i in range(n_frames):
        t = i / script.frame_rate
        while seg_i + 1 < len(script.segments) and t >= starts[seg_i + 1]:
            seg_i += 1
        seg = script.segments[seg_i]
        base = templates[seg.label]
        amp = seg.motion_amplitude
        since = t - starts[seg_i]
        if seg_i > 0 and script.transition_secs > 0 and since < script.transition_secs:
            w = since / script.transition_secs
            prev = script.segments[seg_i - 1]
            base = (1.0 - w) * templates[prev.label] + w * base
            amp = (1.0 - w) * prev.motion_amplitude + w * amp
        xy = base + amp * np.sin(omega * t + phases)
        if script.jitter_scale > 0:
            xy = xy + rng.normal(0.0, script.jitter_scale, size=xy.shape)
        vis = rng.uniform(0.8, 1.0, size=(N_LANDMARKS, 1))
        frames.append(LandmarkFrame(t, np.concatenate([xy, vis], axis=1)))
    return Scenario(frames, annotations)


def write_annotations(annotations, out) -> None:
    json.dump([a.to_dict() for a in annotations], out, indent=1)
    out.write("\n")


def read_annotations(fh) -> list[SegmentAnnotation]:
    return [
        SegmentAnnotation(PoseLabel.parse(a["class"]), float(a["start"]), float(a["end"]))
        for a in json.load(fh)
    ]
