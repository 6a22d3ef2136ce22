"""Independent reference implementations used as test oracles.

Nothing here imports the code under test, apart from plain data types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def pair_rate(t0, v0, t1, v1):
    acc = 0.0
    n = len(v0) // 2
    for k in range(n):
        dx = float(v1[2 * k]) - float(v0[2 * k])
        dy = float(v1[2 * k + 1]) - float(v0[2 * k + 1])
        acc += math.sqrt(dx * dx + dy * dy)
    return (acc / n) / (t1 - t0)


def motion_oracle(times, vecs):
    """Double loop over consecutive pairs and keypoints."""
    if len(times) < 2:
        return math.nan
    total = 0.0
    for p in range(1, len(times)):
        total += pair_rate(times[p - 1], vecs[p - 1], times[p], vecs[p])
    return total / (len(times) - 1)


@dataclass
class TimelineFrame:
    t: float
    label: int | None  # PoseLabel value, None for a rejected frame
    vec: np.ndarray


def timeline_events(
    frames: list[TimelineFrame],
    fall=6,
    hold=3.0,
    drop=2.0,
    window=1.0,
    threshold=0.02,
    gap=1.0,
) -> list[int]:
    """Frame indices at which a fall must be confirmed, found by brute force.

    For every usable frame j: look back over the frames since the last gap
    reset, find the start of the unbroken fall-pose run ending at j and the
    start of the unbroken low-motion run ending at j (inside the fall run),
    and test both durations.  Only the first qualifying frame of each fall
    run is an event.
    """
    acc = [i for i, f in enumerate(frames) if f.label is not None]
    # reset boundaries: a usable frame arriving more than `gap` after the previous one
    seg_start = {}
    start = 0
    for pos, i in enumerate(acc):
        if pos > 0 and frames[i].t - frames[acc[pos - 1]].t > gap:
            start = pos
        seg_start[pos] = start

    # per consecutive usable pair, the displacement rate (cached, order-faithful)
    rates = {}
    for pos in range(1, len(acc)):
        a, b = frames[acc[pos - 1]], frames[acc[pos]]
        rates[pos] = pair_rate(a.t, a.vec, b.t, b.vec)

    def motion_at(pos):
        tj = frames[acc[pos]].t
        lo = pos
        while lo - 1 >= seg_start[pos] and tj - frames[acc[lo - 1]].t <= window:
            lo -= 1
        if pos - lo < 1:
            return math.nan
        total = 0.0
        for p in range(lo + 1, pos + 1):
            total += rates[p]
        return total / (pos - lo)

    motion = [motion_at(pos) for pos in range(len(acc))]

    events = []
    fired_run = None
    for pos in range(len(acc)):
        f = frames[acc[pos]]
        if f.label != fall:
            continue
        s = pos
        while s - 1 >= seg_start[pos] and frames[acc[s - 1]].label == fall:
            s -= 1
        m = pos + 1
        while m - 1 >= s and motion[m - 1] <= threshold:
            m -= 1
        if m > pos:
            continue
        held = f.t - frames[acc[s]].t
        low = f.t - frames[acc[m]].t
        if held > hold and low > drop and fired_run != s:
            events.append(acc[pos])
            fired_run = s
    return events


def prf_oracle(y_true, y_pred, n_classes):
    """Per-class and macro precision/recall/F1 straight from the pair list."""
    per = []
    present = []
    total = len(y_true)
    for c in range(n_classes):
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == c and p == c)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != c and p == c)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == c and p != c)
        tn = total - tp - fp - fn
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        acc = (tp + tn) / (tp + tn + fp + fn)
        per.append((acc, precision, recall, f1))
        if tp + fp + fn:
            present.append(c)
    macro = [sum(per[c][i] for c in present) / len(present) for i in range(1, 4)]
    accuracy = sum(1 for t, p in zip(y_true, y_pred) if t == p) / total
    return accuracy, macro, per


def random_timeline(rng: np.random.Generator, fall=6) -> list[TimelineFrame]:
    """Random label runs with scripted per-segment keypoint speeds.

    Every keypoint moves ``speed * dt`` per frame in a random direction, so
    the motion metric sits at the segment speed (mixed across boundaries).
    """
    fps = rng.uniform(5.0, 15.0)
    frames = []
    t = 0.0
    vec = rng.uniform(0.2, 0.8, size=66)
    for _ in range(int(rng.integers(1, 6))):
        label = fall if rng.random() < 0.6 else int(rng.choice([1, 2, 3, 4, 5, 7, 8, 9, 10, 11, 12]))
        duration = rng.uniform(0.3, 6.0)
        speed = float(rng.choice([0.0, 0.005, 0.015, 0.019, 0.021, 0.03, 0.1]))
        end = t + duration
        while t < end:
            dt = rng.uniform(0.8, 1.2) / fps
            if rng.random() < 0.01:
                dt += rng.uniform(0.9, 1.5)  # dropout; may exceed the reset gap
            t += dt
            ang = rng.uniform(0.0, 2.0 * math.pi, size=33)
            step = np.empty(66)
            step[0::2] = np.cos(ang) * speed * dt
            step[1::2] = np.sin(ang) * speed * dt
            vec = vec + step
            lab = None if rng.random() < 0.04 else label
            frames.append(TimelineFrame(round(t, 6), lab, vec.copy()))
    # rounding can collapse neighbours; keep strictly increasing timestamps
    out = [frames[0]]
    for f in frames[1:]:
        if f.t > out[-1].t:
            out.append(f)
    return out
