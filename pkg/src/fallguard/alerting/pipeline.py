from __future__ import annotations

import logging

from ..fall_monitor import FallEvent
from ..pose_stream import LandmarkFrame
from .gate import CooldownGate
from .sinks import AlertMessage, AlertSink, DispatchReceipt, dispatch
from .snapshot import render_snapshot

logger = logging.getLogger(__name__)


def format_caption(event: FallEvent) -> str:
    return (
        f"FALL DETECTED at t={event.confirmed_at:.2f}s. "
        f"Fall pose held for {event.held_for:.2f}s, "
        f"motion {event.motion_value:.4f}/s. Please check on the person."
    )


def alert_pipeline(
    event: FallEvent,
    frame: LandmarkFrame,
    gate: CooldownGate,
    sink: AlertSink,
    now: float | None = None,
    size: tuple[int, int] = (640, 480),
) -> DispatchReceipt | None:
    """Render and send an alert unless the cooldown suppresses it.

    ``now`` defaults to the event's confirmation time (stream clock).  A send
    that fails leaves the gate as it was, and the error propagates.
    """
    now = event.confirmed_at if now is None else now
    ok, previous = gate.claim(now)
    if not ok:
        logger.info("alert at t=%.2f suppressed by cooldown", now)
        return None
    try:
        msg = AlertMessage(format_caption(event), render_snapshot(frame, *size), event)
        return dispatch(msg, sink)
    except BaseException:
        gate.revert(now, previous)
        raise
