"""Identity-centric access risk scoring with behavioural baselines and quarantine."""

from __future__ import annotations

from .config import EngineConfig
from .context_risk import ContextConfig, Decision, Thresholds, Tier, aggregate_risk, decide, risk_score
from .engine import AuditRecord, DynamicEngine, StaticEngine, replay
from .events import AccessEvent, Action, IdentityState, parse_event_log, pseudonymize
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AccessEvent",
    "Action",
    "AuditRecord",
    "ContextConfig",
    "Decision",
    "DynamicEngine",
    "EngineConfig",
    "IdentityState",
    "StaticEngine",
    "Thresholds",
    "Tier",
    "aggregate_risk",
    "decide",
    "parse_event_log",
    "pseudonymize",
    "replay",
    "risk_score",
]
