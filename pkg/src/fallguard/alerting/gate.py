from __future__ import annotations

import threading


class CooldownGate:
    """Minimum spacing between successful alerts.

    ``should_send`` is a check-and-set under a lock, so concurrent callers
    cannot both pass the same window.
    """

    def __init__(self, cooldown_secs: float = 420.0, last_sent: float | None = None):
        if not cooldown_secs > 0:
            raise ValueError("cooldown_secs must be positive")
        self.cooldown_secs = float(cooldown_secs)
        self.last_sent = last_sent
        self._lock = threading.Lock()

    def claim(self, now: float) -> tuple[bool, float | None]:
        """Check-and-set; also returns the prior ``last_sent`` for :meth:`revert`."""
        with self._lock:
            previous = self.last_sent
            if previous is None or now - previous >= self.cooldown_secs:
                self.last_sent = now
                return True, previous
            return False, previous

    def should_send(self, now: float) -> bool:
        return self.claim(now)[0]

    def revert(self, claimed_at: float, previous: float | None) -> None:
        """Undo a claim made by ``should_send(claimed_at)`` after a failed send."""
        with self._lock:
            if self.last_sent == claimed_at:
                self.last_sent = previous

    def __repr__(self):
        return f"CooldownGate(cooldown_secs={self.cooldown_secs}, last_sent={self.last_sent})"
