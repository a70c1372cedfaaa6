"""Per-event scoring pipeline, static-policy baseline and analyst feedback."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import IO, Iterable, Iterator

from .behavior import (
    BehaviorBaseline,
    anomaly_score,
    extract_features,
    mahalanobis_distance,
    update_baseline,
)
from .config import EngineConfig
from .context_risk import (
    ContextConfig,
    Decision,
    RiskAssessment,
    Thresholds,
    Tier,
    assess_context,
    decide,
)
from .errors import OrderingError, UnknownEventError
from .events import AccessEvent, Action, IdentityState, Pseudonymizer, iter_event_log
from .peer_clustering import ClusterModel, cluster_identities, peer_deviation
from .segmentation import NO_TRAVEL, AccessGraph, Containment, detect_impossible_travel

QUARANTINE_CAP = 0.99
CAP_MARGIN = 1e-6
THRESHOLD_FLOOR = 0.05
HIGH_ANOMALY = 0.9


@dataclass(frozen=True, slots=True)
class AuditRecord:
    event_id: str
    identity: str
    timestamp: int
    A: float
    C: float
    R: float
    tier: str
    reasons: tuple[str, ...]
    engine: str
    w1: float
    w2: float
    P: float | None = None
    w3: float = 0.0

    def to_json(self) -> str:
        obj = {
            "event_id": self.event_id,
            "identity": self.identity,
            "timestamp": self.timestamp,
            "A": self.A,
            "C": self.C,
            "R": self.R,
            "tier": self.tier,
            "reasons": list(self.reasons),
            "engine": self.engine,
            "w1": self.w1,
            "w2": self.w2,
        }
        if self.P is not None:
            obj["P"] = self.P
            obj["w3"] = self.w3
        return json.dumps(obj, separators=(",", ":"))

    @classmethod
    def from_dict(cls, obj: dict) -> "AuditRecord":
        return cls(
            event_id=obj["event_id"],
            identity=obj["identity"],
            timestamp=int(obj["timestamp"]),
            A=float(obj["A"]),
            C=float(obj["C"]),
            R=float(obj["R"]),
            tier=obj["tier"],
            reasons=tuple(obj.get("reasons", ())),
            engine=obj.get("engine", "dynamic"),
            w1=float(obj.get("w1", 0.5)),
            w2=float(obj.get("w2", 0.5)),
            P=obj.get("P"),
            w3=float(obj.get("w3", 0.0)),
        )


def read_audit(source: Iterable[str] | IO) -> list[AuditRecord]:
    out = []
    for line in source:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        if line.strip():
            out.append(AuditRecord.from_dict(json.loads(line)))
    return out


class Judgment(str, Enum):
    FALSE_POSITIVE = "FalsePositive"
    TRUE_POSITIVE = "TruePositive"
    MISSED_THREAT = "MissedThreat"


@dataclass(frozen=True, slots=True)
class Verdict:
    event_id: str
    judgment: Judgment

    @classmethod
    def from_dict(cls, obj: dict) -> "Verdict":
        return cls(obj["event_id"], Judgment(obj["verdict"]))


def adjust_thresholds(thresholds: Thresholds, judgment: Judgment, tier: Tier, rate: float) -> Thresholds:
    """One feedback step.

    A false positive raises the threshold that produced ``tier`` by
    ``(1 + rate)``. If that would reach the next threshold up, the whole
    upper block is scaled instead, never past the quarantine cap. A missed
    threat scales all three down by ``(1 - rate)`` but not below the floor.
    """
    t = list(thresholds.as_tuple())
    if judgment is Judgment.FALSE_POSITIVE:
        if tier is Tier.ALLOW:
            return thresholds
        i = int(tier) - 1
        raised = t[i] * (1.0 + rate)
        upper = t[i + 1] if i < 2 else QUARANTINE_CAP
        if raised < upper:
            t[i] = raised
        else:
            g = min(1.0 + rate, (QUARANTINE_CAP - CAP_MARGIN) / t[2])
            if g <= 1.0:
                return thresholds
            for j in range(i, 3):
                t[j] *= g
    elif judgment is Judgment.MISSED_THREAT:
        g = max(1.0 - rate, THRESHOLD_FLOOR / t[0])
        if g >= 1.0:
            return thresholds
        t = [v * g for v in t]
    else:
        return thresholds
    return Thresholds(*t)


class DynamicEngine:
    """Scores events with R = w1*A + w2*C and segments compromised identities.

    One instance holds all mutable state: identity histories, behavioural
    baselines, the access graph and the current thresholds.
    """

    label = "dynamic"

    def __init__(self, config: EngineConfig | None = None):
        self.config = config or EngineConfig()
        self.thresholds: Thresholds = self.config.thresholds
        self.identities: dict[str, IdentityState] = {}
        self.baselines: dict[str, BehaviorBaseline] = {}
        self.graph = AccessGraph()
        self.pseudonymize = Pseudonymizer(self.config.salt)
        self.decisions: dict[str, Tier] = {}
        self.containments: list[Containment] = []
        self.peer_model: ClusterModel | None = None

    def _state(self, identity_id: str) -> tuple[IdentityState, BehaviorBaseline]:
        state = self.identities.get(identity_id)
        if state is None:
            state = self.identities[identity_id] = IdentityState(identity_id)
            self.baselines[identity_id] = BehaviorBaseline(identity_id, epsilon=self.config.epsilon)
        return state, self.baselines[identity_id]

    def process_event(self, event: AccessEvent) -> tuple[Decision, AuditRecord]:
        cfg = self.config
        state, baseline = self._state(event.identity_id)
        if state.event_count and event.timestamp < state.last_timestamp:
            raise OrderingError(event.event_id, f"timestamp {event.timestamp} precedes {state.last_timestamp}")

        travel = NO_TRAVEL
        if event.action is Action.LOGIN:
            travel = detect_impossible_travel(state, event, cfg.max_speed_kmh, cfg.min_distance_km)
        fv = extract_features(event, state)
        anomaly = anomaly_score(mahalanobis_distance(fv, baseline), baseline, cfg.warmup_threshold)
        context = assess_context(event, state, cfg.context)

        A, C = anomaly.score, context.score
        R = cfg.w1 * A + cfg.w2 * C
        factors = (("anomaly", A, cfg.w1), ("context", C, cfg.w2))
        P = None
        if cfg.peer_weight > 0.0:
            P = peer_deviation(baseline.mean, self.peer_model) if self.peer_model is not None else 0.0
            R += cfg.peer_weight * P
            factors += (("peer_deviation", P, cfg.peer_weight),)
        risk = RiskAssessment(A, C, cfg.w1, cfg.w2, R, factors)

        decision = decide(R, self.thresholds, state.quarantined)
        decision.risk = risk
        reasons = decision.reasons
        reasons.extend(context.reasons())
        if not anomaly.warmup and A >= HIGH_ANOMALY:
            reasons.append("behavior_anomaly")
        if travel.flagged:
            reasons.append("impossible_travel")
            if decision.tier < Tier.RESTRICT:
                decision.tier = Tier.RESTRICT

        if decision.tier is Tier.QUARANTINE and not state.quarantined:
            self.graph.quarantine(event.identity_id, event.timestamp)
            self.containments.append(self.graph.quarantined[event.identity_id])
            state.quarantined = True

        self.graph.record_access(event)
        state.observe(event)
        if event.success:
            update_baseline(baseline, fv)

        self.decisions[event.event_id] = decision.tier
        record = AuditRecord(
            event.event_id,
            self.pseudonymize(event.identity_id),
            event.timestamp,
            A,
            C,
            R,
            decision.tier.label,
            tuple(reasons),
            self.label,
            cfg.w1,
            cfg.w2,
            P,
            cfg.peer_weight,
        )
        return decision, record

    def release(self, identity_id: str) -> None:
        self.graph.release(identity_id)
        self.identities[identity_id].quarantined = False

    def refresh_peer_model(self) -> ClusterModel | None:
        """Re-cluster identities whose baselines are past warm-up."""
        means = {
            i: tuple(b.mean) for i, b in self.baselines.items() if b.n >= self.config.warmup_threshold
        }
        if means:
            self.peer_model = cluster_identities(means, self.config.peer_k, self.config.peer_seed)
        return self.peer_model

    def apply_feedback(self, verdict: Verdict) -> Thresholds:
        tier = self.decisions.get(verdict.event_id)
        if tier is None:
            if verdict.judgment is not Judgment.MISSED_THREAT:
                raise UnknownEventError(f"no recorded decision for event {verdict.event_id!r}")
            tier = Tier.ALLOW
        self.thresholds = adjust_thresholds(self.thresholds, verdict.judgment, tier, self.config.feedback_rate)
        return self.thresholds

    def baseline_records(self) -> list[dict]:
        out = []
        for identity_id in sorted(self.baselines):
            rec = self.baselines[identity_id].to_dict()
            rec["identity"] = self.pseudonymize(identity_id)
            out.append(rec)
        out.sort(key=lambda r: r["identity"])
        return out


def static_decide(event: AccessEvent, state: IdentityState, config: ContextConfig) -> Decision:
    """Fixed rules: allow only a known device, inside business hours, from a non-blocklisted IP."""
    reasons = []
    if event.device_id not in state.known_devices:
        reasons.append("unknown_device")
    if not config.within_business_hours(event.timestamp):
        reasons.append("off_hours")
    if config.ip_blocked(event.source_ip):
        reasons.append("blocklisted_ip")
    if reasons:
        return Decision(Tier.RESTRICT, reasons)
    return Decision(Tier.ALLOW, [])


class StaticEngine:
    """Static-policy baseline. Learns nothing except which devices it has seen.

    An identity's first device is enrolled on first sight; later devices are
    unknown until after their first (restricted) use.
    """

    label = "static"

    def __init__(self, config: EngineConfig | None = None):
        self.config = config or EngineConfig()
        self.identities: dict[str, IdentityState] = {}
        self.pseudonymize = Pseudonymizer(self.config.salt)
        self.decisions: dict[str, Tier] = {}

    def process_event(self, event: AccessEvent) -> tuple[Decision, AuditRecord]:
        state = self.identities.get(event.identity_id)
        if state is None:
            state = self.identities[event.identity_id] = IdentityState(event.identity_id)
        if state.event_count and event.timestamp < state.last_timestamp:
            raise OrderingError(event.event_id, f"timestamp {event.timestamp} precedes {state.last_timestamp}")
        if not state.known_devices:
            state.register_device(event.device_id, event.timestamp)
        decision = static_decide(event, state, self.config.context)
        state.register_device(event.device_id, event.timestamp)
        state.event_count += 1
        state.last_timestamp = event.timestamp
        self.decisions[event.event_id] = decision.tier
        record = AuditRecord(
            event.event_id,
            self.pseudonymize(event.identity_id),
            event.timestamp,
            0.0,
            0.0,
            0.0,
            decision.tier.label,
            tuple(decision.reasons),
            self.label,
            self.config.w1,
            self.config.w2,
        )
        return decision, record


@dataclass
class ReplayResult:
    audit: list[AuditRecord]
    decisions: list[Decision]
    events: int = 0

    def audit_bytes(self) -> bytes:
        return "".join(r.to_json() + "\n" for r in self.audit).encode("utf-8")


def replay(engine: DynamicEngine | StaticEngine, events: Iterable[AccessEvent] | bytes | str | IO) -> ReplayResult:
    """Fold ``process_event`` over an event log (parsed lazily if given raw)."""
    if isinstance(events, (bytes, str)) or hasattr(events, "read"):
        events = iter_event_log(events)
    audit: list[AuditRecord] = []
    decisions: list[Decision] = []
    for event in events:
        decision, record = engine.process_event(event)
        audit.append(record)
        decisions.append(decision)
    return ReplayResult(audit, decisions, len(audit))


def iter_replay(engine, events: Iterable[AccessEvent]) -> Iterator[AuditRecord]:
    for event in events:
        yield engine.process_event(event)[1]


def with_thresholds(config: EngineConfig, thresholds: Thresholds) -> EngineConfig:
    return replace(config, thresholds=thresholds)
