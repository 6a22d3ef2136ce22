import io
import json
import socket

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from fallguard.alerting import (
    AlertMessage,
    ApiError,
    CooldownGate,
    DryRunSink,
    NetworkError,
    SinkIoError,
    TelegramSink,
    alert_pipeline,
    format_caption,
    render_snapshot,
)
from fallguard.fall_monitor import FallEvent
from fallguard.pose_stream import LandmarkFrame

from helpers import MockTelegram, parse_multipart

TOKEN = "123456:SECRET-token"


def frame(t=5.0, value=0.5, vis=1.0):
    pts = np.full((33, 3), value)
    pts[:, 2] = vis
    return LandmarkFrame(t, pts)


def event(t=5.0):
    f = frame(t)
    return FallEvent(t, t - 3.2, 0.004, f)


def message(t=5.0):
    ev = event(t)
    return AlertMessage(format_caption(ev), render_snapshot(ev.trigger_frame, 64, 64), ev)


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


# ---------------------------------------------------------------- snapshot


def test_snapshot_dimensions_and_determinism():
    f = frame()
    png = render_snapshot(f, 320, 240)
    img = Image.open(io.BytesIO(png))
    assert img.format == "PNG" and img.size == (320, 240)
    assert render_snapshot(f, 320, 240) == png


def test_snapshot_centroid():
    img = np.asarray(Image.open(io.BytesIO(render_snapshot(frame(), 200, 200))).convert("L"), dtype=float)
    bg = np.median(img)
    ys, xs = np.nonzero(np.abs(img - bg) > 10)
    assert xs.size > 0
    assert xs.mean() == pytest.approx(100, abs=1.5)
    assert ys.mean() == pytest.approx(100, abs=1.5)


def test_snapshot_dim_landmarks_change_image():
    assert render_snapshot(frame(vis=0.1), 100, 100) != render_snapshot(frame(vis=1.0), 100, 100)


def test_snapshot_too_small():
    with pytest.raises(ValueError):
        render_snapshot(frame(), 32, 200)


def test_message_validation():
    with pytest.raises(ValueError):
        AlertMessage("", message().snapshot, event())
    with pytest.raises(ValueError):
        AlertMessage("hi", b"GIF89a", event())


def test_caption_mentions_time_and_duration():
    cap = format_caption(event(12.5))
    assert "12.50" in cap and "3.20" in cap


# ---------------------------------------------------------------- gate


def test_gate_sequence():
    g = CooldownGate(420)
    assert g.should_send(0.0)
    assert not g.should_send(300.0)
    assert not g.should_send(100.0)
    assert not g.should_send(350.0)
    assert g.should_send(420.0)
    assert not g.should_send(500.0)


def test_gate_revert():
    g = CooldownGate(60, last_sent=10.0)
    ok, prev = g.claim(100.0)
    assert ok and prev == 10.0
    g.revert(100.0, prev)
    assert g.last_sent == 10.0


def test_gate_rejects_nonpositive():
    with pytest.raises(ValueError):
        CooldownGate(0)


@settings(max_examples=100, deadline=None)
@given(
    st.sampled_from([1.0, 60.0, 420.0]),
    st.lists(st.tuples(st.floats(0.0, 200.0), st.booleans()), min_size=1, max_size=40),
)
def test_successful_alerts_are_spaced(cooldown, steps):
    """Fake clock; each trigger either succeeds or its send fails."""
    gate = CooldownGate(cooldown)
    now = 0.0
    sent = []

    class Sink:
        name = "fake"
        fail = False

        def send(self, msg):
            if self.fail:
                raise NetworkError("down", 4)
            return None

    sink = Sink()
    last_ok = None
    for dt, fails in steps:
        now += dt
        sink.fail = fails
        expect_pass = last_ok is None or now - last_ok >= cooldown
        try:
            alert_pipeline(event(now), frame(now), gate, sink, size=(64, 64))
            if expect_pass:
                sent.append(now)
                last_ok = now
            else:
                # suppression returns None without calling the sink
                pass
        except NetworkError:
            assert expect_pass
    assert all(b - a >= cooldown for a, b in zip(sent, sent[1:]))
    assert gate.last_sent == last_ok


# ---------------------------------------------------------------- sinks


def test_dryrun_sink(tmp_path):
    sink = DryRunSink(tmp_path / "out")
    r1 = sink.send(message(5.0))
    r2 = sink.send(message(9.0))
    assert r1.success and r1.sink == "dryrun"
    side = json.loads((tmp_path / "out" / "alert_0001.json").read_text())
    assert side["png"] == "alert_0001.png" and side["confirmed_at"] == 5.0
    assert "FALL" in side["caption"]
    assert Image.open(tmp_path / "out" / "alert_0002.png").format == "PNG"
    assert r2.path.endswith("alert_0002.json")


def test_dryrun_does_not_overwrite(tmp_path):
    (tmp_path / "alert_0001.png").write_bytes(b"keep")
    DryRunSink(tmp_path).send(message())
    assert (tmp_path / "alert_0001.png").read_bytes() == b"keep"
    assert (tmp_path / "alert_0002.png").exists()


def test_dryrun_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(SinkIoError):
        DryRunSink(blocker / "sub").send(message())


def test_telegram_success():
    with MockTelegram([(200, {"ok": True, "result": {"message_id": 42}})]) as mock:
        sink = TelegramSink(TOKEN, "777", api_base_url=mock.url)
        msg = message()
        receipt = sink.send(msg)
    assert receipt.success and receipt.remote_id == 42 and receipt.attempts == 1
    assert len(mock.requests) == 1
    req = mock.requests[0]
    assert req["path"] == f"/bot{TOKEN}/sendPhoto"
    assert req["content_type"].startswith("multipart/form-data")
    parts = parse_multipart(req["content_type"], req["body"])
    assert parts["chat_id"][1] == b"777"
    assert parts["caption"][1].decode() == msg.text
    assert parts["photo"][0] == "fall.png"
    assert Image.open(io.BytesIO(parts["photo"][1])).size == (64, 64)


def test_telegram_api_error_not_retried():
    sleeps = []
    body = {"ok": False, "error_code": 401, "description": "Unauthorized"}
    with MockTelegram([(401, body)] * 3) as mock:
        sink = TelegramSink(TOKEN, "1", api_base_url=mock.url, sleep=sleeps.append)
        with pytest.raises(ApiError) as exc:
            sink.send(message())
    assert exc.value.code == 401
    assert len(mock.requests) == 1 and sleeps == []
    assert "SECRET" not in str(exc.value)


def test_telegram_connection_refused_retries():
    sleeps = []
    sink = TelegramSink(
        TOKEN, "1", api_base_url=f"http://127.0.0.1:{free_port()}", timeout_secs=2, sleep=sleeps.append
    )
    with pytest.raises(NetworkError) as exc:
        sink.send(message())
    assert sleeps == [1.0, 2.0, 4.0]
    assert exc.value.attempts == 4
    assert "SECRET" not in str(exc.value)
    assert "SECRET" not in repr(sink)


def test_telegram_requires_credentials():
    with pytest.raises(ValueError):
        TelegramSink("", "1")
    with pytest.raises(ValueError):
        TelegramSink(TOKEN, "")


# ---------------------------------------------------------------- pipeline


def test_pipeline_suppresses_within_cooldown(tmp_path):
    gate = CooldownGate(420)
    sink = DryRunSink(tmp_path)
    assert alert_pipeline(event(0.0), frame(0.0), gate, sink, size=(64, 64)) is not None
    assert alert_pipeline(event(60.0), frame(60.0), gate, sink, size=(64, 64)) is None
    assert sorted(p.name for p in tmp_path.iterdir()) == ["alert_0001.json", "alert_0001.png"]


def test_pipeline_failure_leaves_gate(tmp_path):
    gate = CooldownGate(420, last_sent=None)
    sink = TelegramSink(TOKEN, "1", api_base_url=f"http://127.0.0.1:{free_port()}", sleep=lambda s: None)
    with pytest.raises(NetworkError):
        alert_pipeline(event(0.0), frame(0.0), gate, sink, size=(64, 64))
    assert gate.last_sent is None
    assert alert_pipeline(event(1.0), frame(1.0), gate, DryRunSink(tmp_path), size=(64, 64)) is not None
