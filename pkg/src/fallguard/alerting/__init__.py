"""Snapshot rendering, cooldown gate and alert dispatch."""

from .gate import CooldownGate
from .pipeline import alert_pipeline, format_caption
from .sinks import (
    DEFAULT_API_BASE,
    TOKEN_ENV,
    AlertError,
    AlertMessage,
    AlertSink,
    ApiError,
    DispatchReceipt,
    DryRunSink,
    NetworkError,
    SinkIoError,
    TelegramSink,
    dispatch,
)
from .snapshot import render_snapshot

__all__ = [
    "DEFAULT_API_BASE",
    "TOKEN_ENV",
    "AlertError",
    "AlertMessage",
    "AlertSink",
    "ApiError",
    "CooldownGate",
    "DispatchReceipt",
    "DryRunSink",
    "NetworkError",
    "SinkIoError",
    "TelegramSink",
    "alert_pipeline",
    "dispatch",
    "format_caption",
    "render_snapshot",
]
