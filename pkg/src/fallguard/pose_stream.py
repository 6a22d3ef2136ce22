"""Landmark data model, newline-delimited JSON wire format and readers."""

from __future__ import annotations

import enum
import io
import json
import logging
import math
import socket
import sys
import time
from collections import Counter
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator, NamedTuple, Sequence

import numpy as np

logger = logging.getLogger(__name__)

N_LANDMARKS = 33

LANDMARK_NAMES = (
    "nose",
    "left_eye_inner", "left_eye", "left_eye_outer",
    "right_eye_inner", "right_eye", "right_eye_outer",
    "left_ear", "right_ear",
    "mouth_left", "mouth_right",
    "left_shoulder", "right_shoulder",
    "left_elbow", "right_elbow",
    "left_wrist", "right_wrist",
    "left_pinky", "right_pinky",
    "left_index", "right_index",
    "left_thumb", "right_thumb",
    "left_hip", "right_hip",
    "left_knee", "right_knee",
    "left_ankle", "right_ankle",
    "left_heel", "right_heel",
    "left_foot_index", "right_foot_index",
)  # fmt: skip

BONES = (
    (0, 1), (1, 2), (2, 3), (3, 7), (0, 4), (4, 5), (5, 6), (6, 8), (9, 10),
    (11, 12), (11, 13), (13, 15), (15, 17), (15, 19), (15, 21), (17, 19),
    (12, 14), (14, 16), (16, 18), (16, 20), (16, 22), (18, 20),
    (11, 23), (12, 24), (23, 24), (23, 25), (24, 26), (25, 27), (26, 28),
    (27, 29), (28, 30), (29, 31), (30, 32), (27, 31), (28, 32),
)  # fmt: skip


class DecodeError(ValueError):
    """A stream or dataset record could not be decoded."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class PoseLabel(enum.IntEnum):
    """The twelve pose classes.  ``POSE6`` is the fall/prone pose."""

    POSE1 = 1
    POSE2 = 2
    POSE3 = 3
    POSE4 = 4
    POSE5 = 5
    POSE6 = 6
    POSE7 = 7
    POSE8 = 8
    POSE9 = 9
    POSE10 = 10
    POSE11 = 11
    POSE12 = 12

    def __str__(self) -> str:
        return f"Pose{self.value}"

    @property
    def index(self) -> int:
        """Zero-based class index used by the classifiers."""
        return self.value - 1

    @classmethod
    def from_index(cls, index: int) -> "PoseLabel":
        return cls(int(index) + 1)

    @classmethod
    def parse(cls, text: str) -> "PoseLabel":
        if isinstance(text, str) and text.startswith("Pose") and text[4:].isdigit():
            n = int(text[4:])
            if 1 <= n <= 12:
                return cls(n)
        raise ValueError(f"unknown pose label {text!r}")


N_CLASSES = len(PoseLabel)
FALL_POSE = PoseLabel.POSE6


class Landmark(NamedTuple):
    x: float
    y: float
    visibility: float


@dataclass(frozen=True, eq=False)
class LandmarkFrame:
    """One timestamped observation of 33 landmarks.

    ``points`` is a read-only (33, 3) float64 array of (x, y, visibility).
    """

    timestamp: float
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"landmarks must be [x, y, visibility] triples, got shape {pts.shape}")
        if pts.shape[0] != N_LANDMARKS:
            raise ValueError(f"expected {N_LANDMARKS} landmarks, got {pts.shape[0]}")
        if not np.isfinite(pts).all():
            raise ValueError("landmark values must be finite")
        vis = pts[:, 2]
        if (vis < 0).any() or (vis > 1).any():
            raise ValueError("visibility must lie in [0, 1]")
        t = float(self.timestamp)
        if not math.isfinite(t) or t < 0:
            raise ValueError(f"timestamp must be finite and >= 0, got {self.timestamp!r}")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "timestamp", t)

    @property
    def landmarks(self) -> tuple[Landmark, ...]:
        return tuple(Landmark(float(x), float(y), float(v)) for x, y, v in self.points)

    @property
    def xy(self) -> np.ndarray:
        return self.points[:, :2]

    def with_timestamp(self, timestamp: float) -> "LandmarkFrame":
        return LandmarkFrame(timestamp, self.points)

    def __eq__(self, other):
        if not isinstance(other, LandmarkFrame):
            return NotImplemented
        return self.timestamp == other.timestamp and np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash((self.timestamp, self.points.tobytes()))

    def __repr__(self):
        return f"LandmarkFrame(t={self.timestamp!r})"


@dataclass(frozen=True)
class LabeledSample:
    frame: LandmarkFrame
    label: PoseLabel


# --------------------------------------------------------------------------
# wire format


def encode_frame(frame: LandmarkFrame, label: PoseLabel | None = None) -> str:
    """Serialise one frame as a JSON line (without the trailing newline)."""
    record = {"t": frame.timestamp, "lm": frame.points.tolist()}
    if label is not None:
        record["label"] = str(label)
    return json.dumps(record, separators=(",", ":"))


def write_stream(frames: Iterable[LandmarkFrame], out) -> int:
    """Write frames to a text stream, one per line.  Returns the count."""
    n = 0
    for frame in frames:
        out.write(encode_frame(frame) + "\n")
        n += 1
    return n


def write_dataset(samples: Iterable[LabeledSample], out) -> int:
    n = 0
    for s in samples:
        out.write(encode_frame(s.frame, s.label) + "\n")
        n += 1
    return n


def _decode_record(line: str | bytes, lineno: int) -> tuple[LandmarkFrame, dict]:
    try:
        record = json.loads(line)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DecodeError(f"invalid JSON ({exc})", lineno) from None
    if not isinstance(record, dict) or "t" not in record or "lm" not in record:
        raise DecodeError('record must be an object with "t" and "lm"', lineno)
    lm = record["lm"]
    if not isinstance(lm, list):
        raise DecodeError('"lm" must be a list', lineno)
    if len(lm) != N_LANDMARKS:
        raise DecodeError(f"expected {N_LANDMARKS}, got {len(lm)} landmarks", lineno)
    t = record["t"]
    if isinstance(t, bool) or not isinstance(t, (int, float)):
        raise DecodeError('"t" must be a number', lineno)
    try:
        frame = LandmarkFrame(float(t), lm)
    except (ValueError, TypeError) as exc:
        raise DecodeError(str(exc), lineno) from None
    return frame, record


def _lines(source) -> Iterator[tuple[int, bytes | str]]:
    for lineno, line in enumerate(source, start=1):
        if isinstance(line, bytes):
            if not line.strip():
                continue
        elif not line.strip():
            continue
        yield lineno, line


def read_stream(source: Iterable[bytes] | Iterable[str]) -> Iterator[LandmarkFrame]:
    """Lazily decode frames from a line iterable (binary or text file object).

    Raises ``DecodeError`` on the first malformed line; nothing is yielded
    after an error.  Socket and file failures propagate as ``OSError``.
    """
    last_t = None
    for lineno, line in _lines(source):
        frame, _ = _decode_record(line, lineno)
        if last_t is not None and frame.timestamp <= last_t:
            raise DecodeError(
                f"non-monotonic timestamp {frame.timestamp!r} after {last_t!r}", lineno
            )
        last_t = frame.timestamp
        yield frame


def load_dataset(source: Iterable[bytes] | Iterable[str]) -> list[LabeledSample]:
    """Read a labeled dataset.  Timestamps are not required to increase."""
    samples = []
    for lineno, line in _lines(source):
        frame, record = _decode_record(line, lineno)
        if "label" not in record:
            raise DecodeError('missing "label"', lineno)
        try:
            label = PoseLabel.parse(record["label"])
        except ValueError as exc:
            raise DecodeError(str(exc), lineno) from None
        samples.append(LabeledSample(frame, label))
    counts = class_counts(samples)
    logger.info(
        "loaded %d samples: %s",
        len(samples),
        ", ".join(f"{lab}={counts[lab]}" for lab in PoseLabel if counts[lab]),
    )
    return samples


def class_counts(samples: Sequence[LabeledSample]) -> dict[PoseLabel, int]:
    c = Counter(s.label for s in samples)
    return {lab: c.get(lab, 0) for lab in PoseLabel}


# --------------------------------------------------------------------------
# replay and sources


def replay(
    frames: Iterable[LandmarkFrame],
    speed: float = 1.0,
    *,
    clock=time.monotonic,
    sleep=time.sleep,
) -> Iterator[LandmarkFrame]:
    """Yield frames paced by their timestamps divided by ``speed``.

    ``speed=math.inf`` yields without waiting.
    """
    if not speed > 0:
        raise ValueError(f"speed must be positive, got {speed!r}")
    paced = math.isfinite(speed)
    start_wall = None
    start_t = None
    for frame in frames:
        if paced:
            if start_wall is None:
                start_wall, start_t = clock(), frame.timestamp
            else:
                due = start_wall + (frame.timestamp - start_t) / speed
                delay = due - clock()
                if delay > 0:
                    sleep(delay)
        yield frame


def parse_speed(text: str | float) -> float:
    if isinstance(text, (int, float)):
        speed = float(text)
    elif text.strip().lower() in ("max", "inf", "infinity"):
        speed = math.inf
    else:
        speed = float(text)
    if not speed > 0:
        raise ValueError(f"speed must be positive, got {text!r}")
    return speed


def parse_tcp_address(source: str) -> tuple[str, int] | None:
    """``tcp://host:port`` -> (host, port); None for anything else."""
    if not source.startswith("tcp://"):
        return None
    host, sep, port = source[len("tcp://") :].rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"bad tcp address {source!r}, expected tcp://HOST:PORT")
    return host or "0.0.0.0", int(port)


def open_source(source: str, *, on_listen=None):
    """Open a stream source named by a path, ``-`` (stdin) or ``tcp://HOST:PORT``.

    For TCP, binds and accepts a single connection; ``on_listen`` receives the
    bound (host, port) before blocking, which lets callers use port 0.
    Returns a binary line iterable that must be closed by the caller.
    """
    if source == "-":
        return sys.stdin.buffer
    addr = parse_tcp_address(source)
    if addr is None:
        return open(source, "rb")
    server = socket.create_server(addr)
    try:
        if on_listen is not None:
            on_listen(server.getsockname()[:2])
        conn, peer = server.accept()
    finally:
        server.close()
    logger.info("accepted stream connection from %s:%s", *peer[:2])
    return _SocketLines(conn)


class _SocketLines(io.RawIOBase):
    """Iterates newline-terminated lines from a socket.

    A connection closed in the middle of a line yields the partial line so the
    decoder reports it as malformed.
    """

    def __init__(self, conn: socket.socket):
        self._conn = conn
        self._file: BinaryIO = conn.makefile("rb")

    def __iter__(self):
        return iter(self._file)

    def close(self):
        try:
            self._file.close()
        finally:
            self._conn.close()
        super().close()
