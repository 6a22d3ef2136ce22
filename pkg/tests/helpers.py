from __future__ import annotations

import json
import threading
from email.parser import BytesParser
from email.policy import HTTP
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from fallguard.fall_monitor import DetectorState, FallDetectorConfig, update
from fallguard.pose_stream import LandmarkFrame, PoseLabel


def frame_from_vec(t: float, vec: np.ndarray, vis: float = 1.0) -> LandmarkFrame:
    pts = np.empty((33, 3))
    pts[:, :2] = np.asarray(vec).reshape(33, 2)
    pts[:, 2] = vis
    return LandmarkFrame(t, pts)


def run_monitor(timeline, cfg: FallDetectorConfig | None = None) -> list[int]:
    """Feed TimelineFrames through the state machine; return event indices."""
    cfg = cfg or FallDetectorConfig()
    state = DetectorState()
    events = []
    for i, f in enumerate(timeline):
        label = None if f.label is None else PoseLabel(f.label)
        state, ev = update(state, label, 1.0, frame_from_vec(f.t, f.vec), cfg)
        if ev is not None:
            events.append(i)
    return events


class MockTelegram:
    """Local stand-in for the Bot API; replies from a scripted queue."""

    def __init__(self, responses=None):
        self.responses = list(responses or [])
        self.requests = []
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                body = self.rfile.read(length)
                outer.requests.append(
                    {"path": self.path, "content_type": self.headers.get("Content-Type"), "body": body}
                )
                status, payload = (
                    outer.responses.pop(0) if outer.responses else (200, {"ok": True, "result": {"message_id": 1}})
                )
                data = json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self.server.server_address[:2]
        return f"http://{host}:{port}"

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()


def parse_multipart(content_type: str, body: bytes) -> dict[str, tuple[str | None, bytes]]:
    """field name -> (filename, raw bytes)"""
    msg = BytesParser(policy=HTTP).parsebytes(
        b"Content-Type: " + content_type.encode() + b"\r\n\r\n" + body
    )
    out = {}
    for part in msg.iter_parts():
        name = part.get_param("name", header="content-disposition")
        out[name] = (part.get_filename(), part.get_payload(decode=True))
    return out
