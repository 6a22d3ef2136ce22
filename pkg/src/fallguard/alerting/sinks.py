"""Alert destinations: the Telegram Bot API and a local dry-run directory."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import requests

from ..fall_monitor import FallEvent

logger = logging.getLogger(__name__)

DEFAULT_API_BASE = "https://api.telegram.org"
TOKEN_ENV = "FALLGUARD_BOT_TOKEN"


class AlertError(Exception):
    pass


class NetworkError(AlertError):
    """Transport failure; retried before it surfaces."""

    def __init__(self, message: str, attempts: int = 1):
        self.attempts = attempts
        super().__init__(message)


class ApiError(AlertError):
    """The API answered with a failure.  Not retried."""

    def __init__(self, code: int, description: str = ""):
        self.code = code
        self.description = description
        super().__init__(f"Telegram API error {code}: {description}".rstrip(": "))


class SinkIoError(AlertError):
    pass


@dataclass(frozen=True)
class AlertMessage:
    text: str
    snapshot: bytes
    event: FallEvent

    def __post_init__(self):
        if not self.text:
            raise ValueError("alert text must not be empty")
        if not self.snapshot.startswith(b"\x89PNG\r\n\x1a\n"):
            raise ValueError("snapshot must be PNG bytes")


@dataclass(frozen=True)
class DispatchReceipt:
    sink: str
    success: bool
    remote_id: int | None = None
    path: str | None = None
    attempts: int = 1

    def to_dict(self) -> dict:
        return {
            "sink": self.sink,
            "success": self.success,
            "remote_id": self.remote_id,
            "path": self.path,
            "attempts": self.attempts,
        }


class AlertSink(Protocol):
    name: str

    def send(self, msg: AlertMessage) -> DispatchReceipt: ...


class TelegramSink:
    """Posts the snapshot with caption to ``sendPhoto``.

    Transport errors are retried ``max_retries`` times with exponential
    backoff (``backoff_secs``, doubled each time); API errors are not.
    """

    name = "telegram"

    def __init__(
        self,
        token: str,
        chat_id: str,
        api_base_url: str = DEFAULT_API_BASE,
        timeout_secs: float = 10.0,
        max_retries: int = 3,
        backoff_secs: float = 1.0,
        session: requests.Session | None = None,
        sleep=None,
    ):
        if not token:
            raise ValueError(f"a bot token is required (set {TOKEN_ENV})")
        if not chat_id:
            raise ValueError("chat_id is required for the telegram sink")
        self._token = token
        self.chat_id = str(chat_id)
        self.api_base_url = api_base_url.rstrip("/")
        self.timeout_secs = timeout_secs
        self.max_retries = max_retries
        self.backoff_secs = backoff_secs
        self._session = session or requests.Session()
        self._sleep = sleep

    def __repr__(self):
        return f"TelegramSink(chat_id={self.chat_id!r}, api_base_url={self.api_base_url!r})"

    @property
    def endpoint(self) -> str:
        return f"{self.api_base_url}/bot{self._token}/sendPhoto"

    def _post_once(self, msg: AlertMessage) -> requests.Response:
        return self._session.post(
            self.endpoint,
            data={"chat_id": self.chat_id, "caption": msg.text},
            files={"photo": ("fall.png", msg.snapshot, "image/png")},
            timeout=self.timeout_secs,
        )

    def send(self, msg: AlertMessage) -> DispatchReceipt:
        attempts = 0
        delay = self.backoff_secs
        while True:
            attempts += 1
            try:
                resp = self._post_once(msg)
                break
            except (requests.ConnectionError, requests.Timeout) as exc:
                # the exception text carries the URL, and with it the token
                reason = type(exc).__name__
                if attempts > self.max_retries:
                    raise NetworkError(
                        f"sendPhoto failed after {attempts} attempts ({reason})", attempts
                    ) from None
                logger.warning("sendPhoto attempt %d failed (%s); retrying in %.1fs", attempts, reason, delay)
                (self._sleep or time.sleep)(delay)
                delay *= 2
        try:
            body = resp.json()
        except ValueError:
            body = {}
        if resp.status_code == 200 and isinstance(body, dict) and body.get("ok") is True:
            message_id = (body.get("result") or {}).get("message_id")
            return DispatchReceipt(self.name, True, remote_id=message_id, attempts=attempts)
        code = body.get("error_code", resp.status_code) if isinstance(body, dict) else resp.status_code
        desc = body.get("description", "") if isinstance(body, dict) else ""
        raise ApiError(int(code), str(desc))


class DryRunSink:
    """Writes ``alert_NNNN.png`` plus a JSON sidecar into a directory."""

    name = "dryrun"

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self._seq = 0

    def send(self, msg: AlertMessage) -> DispatchReceipt:
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            while True:
                self._seq += 1
                stem = f"alert_{self._seq:04d}"
                png = self.directory / f"{stem}.png"
                if not png.exists():
                    break
            png.write_bytes(msg.snapshot)
            sidecar = self.directory / f"{stem}.json"
            sidecar.write_text(
                json.dumps(
                    {"caption": msg.text, "confirmed_at": msg.event.confirmed_at, "png": png.name},
                    indent=1,
                )
                + "\n"
            )
        except OSError as exc:
            raise SinkIoError(f"cannot write alert to {self.directory}: {exc}") from exc
        return DispatchReceipt(self.name, True, path=str(sidecar))


def dispatch(msg: AlertMessage, sink: AlertSink) -> DispatchReceipt:
    return sink.send(msg)
