"""Fall detection from pose-landmark streams with cooldown-gated alerting."""

__version__ = "0.1.0"
