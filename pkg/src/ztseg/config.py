"""Engine configuration and its JSON file format."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .behavior import DEFAULT_EPSILON, DEFAULT_WARMUP
from .context_risk import WEIGHT_TOLERANCE, ContextConfig, Thresholds
from .errors import ConfigError
from .segmentation import DEFAULT_MAX_SPEED_KMH, DEFAULT_MIN_DISTANCE_KM

DEFAULT_SALT = "ztseg-default-salt"


@dataclass
class EngineConfig:
    w1: float = 0.5
    w2: float = 0.5
    # third risk factor (peer-group deviation); 0 keeps R = w1*A + w2*C
    peer_weight: float = 0.0
    peer_k: int = 4
    peer_seed: int = 0
    thresholds: Thresholds = field(default_factory=Thresholds)
    context: ContextConfig = field(default_factory=ContextConfig)
    warmup_threshold: int = DEFAULT_WARMUP
    epsilon: float = DEFAULT_EPSILON
    feedback_rate: float = 0.05
    max_speed_kmh: float = DEFAULT_MAX_SPEED_KMH
    min_distance_km: float = DEFAULT_MIN_DISTANCE_KM
    salt: str = DEFAULT_SALT

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        weights = (self.w1, self.w2, self.peer_weight)
        if any(not w >= 0 for w in weights):
            raise ConfigError("risk weights must be non-negative")
        if abs(math.fsum(weights) - 1.0) > WEIGHT_TOLERANCE:
            raise ConfigError(f"w1 + w2 + peer_weight must equal 1, got {math.fsum(weights)!r}")
        if self.warmup_threshold < 0:
            raise ConfigError("warmup_threshold must be non-negative")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if not 0 <= self.feedback_rate < 1:
            raise ConfigError("feedback_rate must be in [0, 1)")
        if self.peer_k < 1:
            raise ConfigError("peer_k must be at least 1")
        if not self.salt:
            raise ConfigError("salt must be non-empty")

    def to_dict(self) -> dict:
        return {
            "w1": self.w1,
            "w2": self.w2,
            "peer_weight": self.peer_weight,
            "peer_k": self.peer_k,
            "peer_seed": self.peer_seed,
            "thresholds": {
                "stepup": self.thresholds.stepup,
                "restrict": self.thresholds.restrict,
                "quarantine": self.thresholds.quarantine,
            },
            "context": self.context.to_dict(),
            "warmup_threshold": self.warmup_threshold,
            "epsilon": self.epsilon,
            "feedback_rate": self.feedback_rate,
            "max_speed_kmh": self.max_speed_kmh,
            "min_distance_km": self.min_distance_km,
            "salt": self.salt,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "EngineConfig":
        known = set(cls().to_dict())
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {k: v for k, v in obj.items() if k not in ("thresholds", "context")}
        try:
            if "thresholds" in obj:
                kwargs["thresholds"] = Thresholds(**obj["thresholds"])
            if "context" in obj:
                kwargs["context"] = ContextConfig.from_dict(obj["context"])
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def load(cls, path: str | Path) -> "EngineConfig":
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(obj)

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")
