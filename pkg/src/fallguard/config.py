"""Application configuration: one JSON file, every key validated.

Unknown keys are rejected so that typos fail loudly.  ``fallguard
--print-default-config`` prints the full default document.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .alerting.sinks import DEFAULT_API_BASE
from .classify import RandomForestParams
from .fall_monitor import FallDetectorConfig
from .features import DEFAULT_MIN_VISIBILITY, DEFAULT_MIN_VISIBLE
from .pose_stream import PoseLabel, parse_speed


class ConfigError(ValueError):
    pass


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class StreamConfig(_Section):
    source: str = Field("-", description='file path, "-" for stdin, or tcp://HOST:PORT')
    speed: Union[float, Literal["max"]] = Field(1.0, description='replay speed factor or "max"')

    @field_validator("speed")
    @classmethod
    def _positive(cls, v):
        if v != "max":
            parse_speed(v)
        return v

    @property
    def speed_value(self) -> float:
        return math.inf if self.speed == "max" else float(self.speed)


class FeaturesConfig(_Section):
    min_visibility: float = Field(DEFAULT_MIN_VISIBILITY, ge=0.0, le=1.0)
    min_visible_count: int = Field(DEFAULT_MIN_VISIBLE, ge=0, le=33)


class RFConfig(_Section):
    n_trees: int = Field(100, ge=1)
    max_depth: Optional[int] = Field(None, ge=1)
    min_samples_split: int = Field(2, ge=2)
    features_per_split: int = Field(9, ge=1, le=66)

    def params(self) -> RandomForestParams:
        return RandomForestParams(**self.model_dump())


class ModelConfig(_Section):
    path: str = "model.fgm"
    type: Literal["rf", "knn"] = "rf"
    rf: RFConfig = Field(default_factory=RFConfig)
    k: int = Field(5, ge=1)
    test_fraction: float = Field(0.2, gt=0.0, lt=1.0)


class MonitorConfig(_Section):
    fall_pose: str = "Pose6"
    pose_hold_secs: float = Field(3.0, gt=0)
    motion_drop_secs: float = Field(2.0, gt=0)
    motion_window_secs: float = Field(1.0, gt=0)
    motion_threshold: float = Field(0.02, gt=0)
    min_confidence: float = Field(0.0, ge=0.0, le=1.0)
    max_gap_secs: float = Field(1.0, gt=0)

    @field_validator("fall_pose")
    @classmethod
    def _label(cls, v):
        PoseLabel.parse(v)
        return v

    def detector(self) -> FallDetectorConfig:
        d = self.model_dump()
        d["fall_pose"] = PoseLabel.parse(d["fall_pose"])
        return FallDetectorConfig(**d)


class AlertConfig(_Section):
    sink: Literal["telegram", "dryrun"] = "dryrun"
    chat_id: Optional[str] = None
    bot_token: Optional[str] = Field(None, description="prefer the FALLGUARD_BOT_TOKEN environment variable")
    cooldown_secs: float = Field(420.0, gt=0)
    dryrun_dir: str = "alerts"
    api_base_url: str = DEFAULT_API_BASE
    timeout_secs: float = Field(10.0, gt=0)
    snapshot_width: int = Field(640, ge=64)
    snapshot_height: int = Field(480, ge=64)


class LoggingConfig(_Section):
    level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    event_log_path: Optional[str] = Field(None, description='JSON-lines event log; "-" for stdout')


class AppConfig(_Section):
    seed: int = 42
    stream: StreamConfig = Field(default_factory=StreamConfig)
    features: FeaturesConfig = Field(default_factory=FeaturesConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    monitor: MonitorConfig = Field(default_factory=MonitorConfig)
    alert: AlertConfig = Field(default_factory=AlertConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)


def default_config_json() -> str:
    return json.dumps(AppConfig().model_dump(mode="json"), indent=2) + "\n"


def load_config(path: str | Path | None) -> AppConfig:
    if path is None:
        return AppConfig()
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    try:
        return AppConfig.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        raise ConfigError(f"config {path}: {loc}: {first['msg']}") from None
