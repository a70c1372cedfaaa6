"""Seeded synthetic enterprise scenarios, engine evaluation and comparison.

The world: identities work from a handful of global offices, each role with
its own UTC working window and resource pool. Compromised identities behave
normally until an onset in the middle third of the horizon, after which one
of three attack templates plays out. Attack traffic egresses through
anonymising relays whose prefixes appear in the scenario's soft-intel feed.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .context_risk import Tier
from .engine import AuditRecord
from .errors import CoverageError
from .events import AccessEvent, Action

DAY = 86400
HOUR = 3600
EARTH_RADIUS_KM = 6371.0

ATTACK_KINDS = ("CredentialCompromise", "InsiderOffHours", "LateralMovement")
LOGIN_RESOURCE = "idp-sso"
FLAGGED = Tier.RESTRICT


@dataclass(frozen=True)
class RoleProfile:
    name: str
    office: tuple[float, float]
    work_hours: tuple[int, int]  # UTC, [start, end); end < start wraps midnight
    resources: tuple[str, ...]
    weekend_rate: float = 0.0

    def window_hours(self) -> int:
        s, e = self.work_hours
        return (e - s) % 24 or 24


def _pool(prefix: str, n: int = 7) -> tuple[str, ...]:
    return tuple(f"{prefix}-{i:02d}" for i in range(n))


DEFAULT_ROLES = (
    RoleProfile("engineering", (51.5074, -0.1278), (8, 18), _pool("eng"), 0.05),
    RoleProfile("support", (50.1109, 8.6821), (7, 16), _pool("sup"), 0.10),
    RoleProfile("finance", (40.7128, -74.0060), (13, 22), _pool("fin")),
    RoleProfile("sales", (1.3521, 103.8198), (1, 10), _pool("sal")),
    RoleProfile("operations", (-33.8688, 151.2093), (22, 7), _pool("ops"), 0.30),
)

RESTRICTED_RESOURCES = (
    "hr-payroll",
    "finance-ledger",
    "secrets-vault",
    "exec-mail",
    "customer-pii",
    "prod-db-admin",
)
SERVER_POOL = tuple(f"srv-{i:03d}" for i in range(120))


@dataclass
class ScenarioSpec:
    n_benign: int = 200
    n_compromised: int = 10
    days: int = 30
    events_per_day: float = 8.0
    attack_mix: dict[str, float] = field(
        default_factory=lambda: {
            "CredentialCompromise": 0.4,
            "InsiderOffHours": 0.3,
            "LateralMovement": 0.3,
        }
    )
    seed: int = 42
    start_timestamp: int = 1704067200  # 2024-01-01T00:00:00Z, a Monday
    roles: tuple[RoleProfile, ...] = DEFAULT_ROLES
    max_devices: int = 3
    jitter_km: float = 20.0
    failed_login_rate: float = 0.03
    attack_distance_km: float = 3000.0
    lateral_min_resources: int = 10
    relay_prefixes: tuple[str, ...] = ("198.51.100.0/24", "203.0.113.0/24")
    blocklist_prefixes: tuple[str, ...] = ("192.0.2.0/24",)

    def validate(self) -> None:
        if min(self.n_benign, self.n_compromised, self.days) < 0:
            raise ValueError("counts must be non-negative")
        if self.n_compromised > self.n_benign:
            raise ValueError("n_compromised may not exceed n_benign")
        if self.events_per_day < 0:
            raise ValueError("events_per_day must be non-negative")
        if set(self.attack_mix) - set(ATTACK_KINDS):
            raise ValueError(f"unknown attack kinds: {sorted(set(self.attack_mix) - set(ATTACK_KINDS))}")
        if any(v < 0 for v in self.attack_mix.values()):
            raise ValueError("attack fractions must be non-negative")
        if abs(math.fsum(self.attack_mix.values()) - 1.0) > 1e-9:
            raise ValueError("attack fractions must sum to 1")
        if not 1 <= self.max_devices <= 3:
            raise ValueError("max_devices must be 1..3")
        if not self.roles:
            raise ValueError("at least one role profile is required")
        if self.n_compromised and self.days < 3:
            raise ValueError("attacks need a horizon of at least 3 days")
        for role in self.roles:
            if len(role.resources) >= self.lateral_min_resources:
                raise ValueError(f"role {role.name!r} pool must stay below the lateral-movement threshold")

    def intel_feed(self) -> dict:
        """Threat intel shipped with the scenario: relay ranges are soft, the rest hard."""
        return {"watchlist": list(self.relay_prefixes), "blocklist": list(self.blocklist_prefixes)}

    def to_dict(self) -> dict:
        d = asdict(self)
        d["roles"] = [asdict(r) for r in self.roles]
        return d

    @classmethod
    def from_dict(cls, obj: dict) -> "ScenarioSpec":
        obj = dict(obj)
        if "roles" in obj:
            obj["roles"] = tuple(
                RoleProfile(
                    r["name"], tuple(r["office"]), tuple(r["work_hours"]), tuple(r["resources"]),
                    r.get("weekend_rate", 0.0),
                )
                for r in obj["roles"]
            )
        for key in ("relay_prefixes", "blocklist_prefixes"):
            if key in obj:
                obj[key] = tuple(obj[key])
        unknown = set(obj) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(**obj)


@dataclass
class IdentityProfile:
    identity_id: str
    role: RoleProfile
    home: tuple[float, float]
    devices: tuple[str, ...]
    device_ips: tuple[str, ...]


@dataclass
class IdentityTruth:
    label: str  # "benign" | "compromised"
    onset: int | None = None
    kind: str | None = None
    malicious_events: list[str] = field(default_factory=list)


@dataclass
class GroundTruth:
    identities: dict[str, IdentityTruth]

    @property
    def malicious_event_ids(self) -> set[str]:
        return {e for t in self.identities.values() for e in t.malicious_events}

    def pseudonymized(self, pseudonymize: Callable[[str], str]) -> "GroundTruth":
        """Re-key by pseudonym so truth lines up with audit records."""
        return GroundTruth({pseudonymize(i): t for i, t in self.identities.items()})

    def to_jsonl(self, pseudonymize: Callable[[str], str] = str) -> bytes:
        rows = []
        for identity_id in sorted(self.identities, key=pseudonymize):
            t = self.identities[identity_id]
            rows.append(
                json.dumps(
                    {
                        "identity": pseudonymize(identity_id),
                        "label": t.label,
                        "onset": t.onset,
                        "kind": t.kind,
                        "malicious_events": t.malicious_events,
                    },
                    separators=(",", ":"),
                )
            )
        return "".join(r + "\n" for r in rows).encode("utf-8")

    @classmethod
    def from_jsonl(cls, lines: Iterable[str | bytes]) -> "GroundTruth":
        out = {}
        for line in lines:
            if isinstance(line, bytes):
                line = line.decode("utf-8")
            if not line.strip():
                continue
            obj = json.loads(line)
            out[obj["identity"]] = IdentityTruth(
                obj["label"], obj.get("onset"), obj.get("kind"), list(obj.get("malicious_events", []))
            )
        return cls(out)


@dataclass
class Scenario:
    events: list[AccessEvent]
    truth: GroundTruth
    profiles: dict[str, IdentityProfile]
    spec: ScenarioSpec


# --- geometry helpers -------------------------------------------------------

def _wrap_lon(lon: float) -> float:
    return (lon + 180.0) % 360.0 - 180.0


def _jitter(rng: np.random.Generator, origin: tuple[float, float], sigma_km: float) -> tuple[float, float]:
    lat0, lon0 = origin
    dlat = rng.normal(0.0, sigma_km) / 111.195
    dlon = rng.normal(0.0, sigma_km) / (111.195 * max(0.05, math.cos(math.radians(lat0))))
    lat = min(90.0, max(-90.0, lat0 + dlat))
    return round(lat, 5), round(_wrap_lon(lon0 + dlon), 5)


def _destination(origin: tuple[float, float], bearing: float, distance_km: float) -> tuple[float, float]:
    phi1, lam1 = math.radians(origin[0]), math.radians(origin[1])
    delta = distance_km / EARTH_RADIUS_KM
    phi2 = math.asin(math.sin(phi1) * math.cos(delta) + math.cos(phi1) * math.sin(delta) * math.cos(bearing))
    lam2 = lam1 + math.atan2(
        math.sin(bearing) * math.sin(delta) * math.cos(phi1),
        math.cos(delta) - math.sin(phi1) * math.sin(phi2),
    )
    return round(math.degrees(phi2), 5), round(_wrap_lon(math.degrees(lam2)), 5)


def in_window(timestamp: int, work_hours: tuple[int, int]) -> bool:
    hour = (timestamp % DAY) / HOUR
    s, e = work_hours
    if s < e:
        return s <= hour < e
    return hour >= s or hour < e


def _relay_ip(rng: np.random.Generator, prefixes: Sequence[str]) -> str:
    prefix = prefixes[int(rng.integers(len(prefixes)))]
    base = prefix.split("/")[0].rsplit(".", 1)[0]
    return f"{base}.{int(rng.integers(1, 255))}"


# --- generation -------------------------------------------------------------

Draft = tuple  # (timestamp, seq, AccessEvent-kwargs, malicious)


def _benign_events(rng, profile: IdentityProfile, spec: ScenarioSpec) -> list[dict]:
    out = []
    role = profile.role
    start_h = role.work_hours[0]
    span = role.window_hours() * HOUR
    for day in range(spec.days):
        day_start = spec.start_timestamp + day * DAY
        weekend = (day_start // DAY + 3) % 7 >= 5
        if weekend and rng.random() >= role.weekend_rate:
            continue
        n = int(rng.poisson(spec.events_per_day))
        if n == 0:
            continue
        offsets = np.sort(rng.integers(0, span - 60, size=n))
        k = int(rng.integers(len(profile.devices)))
        device, ip = profile.devices[k], profile.device_ips[k]
        for j, off in enumerate(offsets):
            ts = int(day_start + start_h * HOUR + off)
            lat, lon = _jitter(rng, profile.home, spec.jitter_km)
            base = dict(identity_id=profile.identity_id, device_id=device, source_ip=ip, lat=lat, lon=lon)
            if j == 0:
                if rng.random() < spec.failed_login_rate:
                    out.append(dict(base, timestamp=ts, resource_id=LOGIN_RESOURCE, action=Action.LOGIN, success=False))
                    ts += 30
                out.append(dict(base, timestamp=ts, resource_id=LOGIN_RESOURCE, action=Action.LOGIN, success=True))
            else:
                r = rng.random()
                action = Action.READ if r < 0.7 else Action.WRITE if r < 0.95 else Action.ADMIN
                resource = role.resources[int(rng.integers(len(role.resources)))]
                out.append(dict(base, timestamp=ts, resource_id=resource, action=action, success=True))
    return out


def _far_point(rng, home, spec: ScenarioSpec) -> tuple[float, float]:
    # margin keeps jittered attack events beyond the template distance
    d = spec.attack_distance_km + 250.0 + rng.random() * 5000.0
    return _destination(home, rng.random() * 2.0 * math.pi, d)


def _hour_outside(rng, work_hours: tuple[int, int]) -> float:
    """Start hour (UTC) for a one-hour session entirely outside the window."""
    s, e = work_hours
    free = (s - e) % 24  # hours outside the window
    return (e + 0.5 + rng.random() * max(0.0, free - 2.0)) % 24


def _attack_events(rng, profile: IdentityProfile, kind: str, spec: ScenarioSpec) -> tuple[int, list[dict]]:
    role = profile.role
    lo, hi = spec.days // 3, (2 * spec.days) // 3
    onset_day = int(rng.integers(lo, max(lo + 1, hi)))
    exit_geo = _far_point(rng, profile.home, spec)
    ip = _relay_ip(rng, spec.relay_prefixes)
    known = profile.devices[int(rng.integers(len(profile.devices)))]
    foreign = sorted(set(SERVER_POOL) - set(role.resources))
    out: list[dict] = []

    def session(start_ts: int, device: str, resources: Sequence[str], spacing: tuple[int, int]) -> None:
        ts = start_ts
        base = dict(identity_id=profile.identity_id, device_id=device, source_ip=ip)
        lat, lon = _jitter(rng, exit_geo, 5.0)
        out.append(dict(base, timestamp=ts, resource_id=LOGIN_RESOURCE, action=Action.LOGIN, success=True, lat=lat, lon=lon))
        for res in resources:
            ts += int(rng.integers(*spacing))
            lat, lon = _jitter(rng, exit_geo, 5.0)
            action = Action.READ if rng.random() < 0.6 else Action.WRITE
            out.append(dict(base, timestamp=ts, resource_id=res, action=action, success=True, lat=lat, lon=lon))

    n_sessions = int(rng.integers(1, 3))
    if kind == "CredentialCompromise":
        device = f"{profile.identity_id}-x{int(rng.integers(1000, 9999))}"
        for s in range(n_sessions):
            day = min(onset_day + s, spec.days - 1)
            start = spec.start_timestamp + day * DAY + int(rng.integers(0, 22 * HOUR))
            m = int(rng.integers(4, 9))
            picks = rng.choice(len(foreign), size=m, replace=False)
            session(start, device, [foreign[i] for i in picks], (60, 600))
    elif kind == "InsiderOffHours":
        for s in range(n_sessions):
            day = min(onset_day + s, spec.days - 1)
            hour = _hour_outside(rng, role.work_hours)
            start = spec.start_timestamp + day * DAY + int(hour * HOUR)
            m = int(rng.integers(3, 7))
            picks = rng.choice(len(RESTRICTED_RESOURCES), size=m, replace=False)
            session(start, known, [RESTRICTED_RESOURCES[i] for i in picks], (60, 500))
    elif kind == "LateralMovement":
        s, _ = role.work_hours
        span = role.window_hours() - 1
        start = spec.start_timestamp + onset_day * DAY + int((s + rng.random() * span) * HOUR)
        m = int(rng.integers(spec.lateral_min_resources, spec.lateral_min_resources + 7))
        picks = rng.choice(len(foreign), size=m, replace=False)
        # m accesses spaced <= 200 s stay inside one hour
        session(start, known, [foreign[i] for i in picks], (30, 200))
    else:  # pragma: no cover - validated upstream
        raise ValueError(kind)
    onset = min(e["timestamp"] for e in out)
    return onset, out


def _kind_counts(n: int, mix: dict[str, float]) -> list[str]:
    """Largest-remainder apportionment of ``n`` attacks over the mix."""
    kinds = [k for k in ATTACK_KINDS if mix.get(k, 0.0) > 0]
    raw = {k: n * mix[k] for k in kinds}
    counts = {k: int(math.floor(v)) for k, v in raw.items()}
    rest = n - sum(counts.values())
    for k in sorted(kinds, key=lambda k: (-(raw[k] - counts[k]), ATTACK_KINDS.index(k)))[:rest]:
        counts[k] += 1
    return [k for k in kinds for _ in range(counts[k])]


def generate_scenario(spec: ScenarioSpec) -> Scenario:
    """Deterministic (events, ground truth) for ``spec``; same spec, same bytes."""
    spec.validate()
    total = spec.n_benign + spec.n_compromised
    seq = np.random.SeedSequence(spec.seed)
    children = seq.spawn(total + 1)
    world = np.random.default_rng(children[-1])

    ids = [f"user-{i:04d}" for i in range(total)]
    compromised = sorted(int(i) for i in world.choice(total, size=spec.n_compromised, replace=False)) if total else []
    kinds = _kind_counts(spec.n_compromised, spec.attack_mix)
    world.shuffle(kinds)
    kind_of = dict(zip(compromised, kinds))

    profiles: dict[str, IdentityProfile] = {}
    truth: dict[str, IdentityTruth] = {}
    drafts: list[tuple[int, int, int, dict, bool]] = []
    for idx, identity_id in enumerate(ids):
        rng = np.random.default_rng(children[idx])
        role = spec.roles[int(rng.integers(len(spec.roles)))]
        home = _jitter(rng, role.office, spec.jitter_km)
        n_dev = int(rng.integers(1, spec.max_devices + 1))
        devices = tuple(f"{identity_id}-d{j}" for j in range(n_dev))
        ips = tuple(f"10.{spec.roles.index(role) + 1}.{(idx * 3 + j) // 250}.{(idx * 3 + j) % 250 + 1}" for j in range(n_dev))
        profile = IdentityProfile(identity_id, role, home, devices, ips)
        profiles[identity_id] = profile

        items = [(e, False) for e in _benign_events(rng, profile, spec)]
        if idx in kind_of:
            onset, attack = _attack_events(rng, profile, kind_of[idx], spec)
            items += [(e, True) for e in attack]
            truth[identity_id] = IdentityTruth("compromised", onset, kind_of[idx])
        else:
            truth[identity_id] = IdentityTruth("benign")
        items.sort(key=lambda it: it[0]["timestamp"])  # stable: benign-before-attack on ties
        for n, (e, malicious) in enumerate(items):
            drafts.append((e["timestamp"], idx, n, e, malicious))

    drafts.sort(key=lambda d: (d[0], d[1], d[2]))
    events = []
    for i, (_, _, _, e, malicious) in enumerate(drafts):
        event = AccessEvent(event_id=f"e{i:07d}", **e)
        events.append(event)
        if malicious:
            truth[event.identity_id].malicious_events.append(event.event_id)
    return Scenario(events, GroundTruth(truth), profiles, spec)


# --- label soundness ------------------------------------------------------

def template_matches(scenario: Scenario) -> dict[str, set[str]]:
    """Re-scan the log for each attack template's defining predicate.

    CredentialCompromise: a device outside the identity's issued set used
    at least ``attack_distance_km`` from home. InsiderOffHours: a restricted
    resource touched outside the working window. LateralMovement: at least
    ``lateral_min_resources`` distinct resources inside a sliding hour.
    """
    spec = scenario.spec
    restricted = set(RESTRICTED_RESOURCES)
    hits: dict[str, set[str]] = {}
    per_identity: dict[str, list[AccessEvent]] = {}
    for e in scenario.events:
        per_identity.setdefault(e.identity_id, []).append(e)
    for identity, events in per_identity.items():
        prof = scenario.profiles[identity]
        found = set()
        for e in events:
            if e.device_id not in prof.devices and kernels.haversine_km(
                prof.home[0], prof.home[1], e.lat, e.lon
            ) >= spec.attack_distance_km:
                found.add("CredentialCompromise")
            if e.resource_id in restricted and not in_window(e.timestamp, prof.role.work_hours):
                found.add("InsiderOffHours")
        lo = 0
        for hi, e in enumerate(events):
            while events[lo].timestamp <= e.timestamp - HOUR:
                lo += 1
            if len({x.resource_id for x in events[lo:hi + 1]}) >= spec.lateral_min_resources:
                found.add("LateralMovement")
                break
        if found:
            hits[identity] = found
    return hits


# --- evaluation -------------------------------------------------------------

@dataclass
class Metrics:
    recall: float
    false_positive_rate: float
    mean_containment: float | None
    uncontained: int
    throughput: float | None = None
    latency_us: float | None = None
    n_compromised: int = 0
    n_benign: int = 0
    detected: int = 0
    false_positives: int = 0
    recall_any_record: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(audit: Sequence[AuditRecord], truth: GroundTruth, throughput: float | None = None) -> Metrics:
    """Identity-level metrics.

    A compromised identity counts as detected when one of its malicious
    events reaches Restrict or higher; ``recall_any_record`` is the looser
    rate that credits any flagged record at or after onset. A benign
    identity is a false positive when any of its records is flagged. Containment counts malicious
    events up to and including the first Quarantine record (all of them if
    the identity is never quarantined).
    """
    by_identity: dict[str, list[AuditRecord]] = {}
    for rec in audit:
        by_identity.setdefault(rec.identity, []).append(rec)
    missing = [i for i in truth.identities if i not in by_identity]
    if missing:
        raise CoverageError(f"{len(missing)} truth identities absent from audit, e.g. {missing[0]!r}")

    detected = loose = fps = uncontained = 0
    n_comp = n_ben = 0
    containment: list[int] = []
    for identity, t in truth.identities.items():
        records = sorted(by_identity[identity], key=lambda r: (r.timestamp, r.event_id))
        if t.label == "compromised":
            n_comp += 1
            onset = t.onset or 0
            bad = set(t.malicious_events)
            if any(r.event_id in bad and Tier.from_label(r.tier) >= FLAGGED for r in records):
                detected += 1
            if any(Tier.from_label(r.tier) >= FLAGGED for r in records if r.timestamp >= onset):
                loose += 1
            count, contained = 0, False
            for r in records:
                if r.event_id in bad:
                    count += 1
                if r.tier == "Quarantine" and r.timestamp >= onset:
                    contained = True
                    break
            if not contained:
                uncontained += 1
                count = len(bad)
            containment.append(max(count, 1))
        else:
            n_ben += 1
            if any(Tier.from_label(r.tier) >= FLAGGED for r in records):
                fps += 1
    return Metrics(
        recall=detected / n_comp if n_comp else 0.0,
        false_positive_rate=fps / n_ben if n_ben else 0.0,
        mean_containment=sum(containment) / len(containment) if containment else None,
        uncontained=uncontained,
        throughput=throughput,
        latency_us=1e6 / throughput if throughput else None,
        n_compromised=n_comp,
        n_benign=n_ben,
        detected=detected,
        false_positives=fps,
        recall_any_record=loose / n_comp if n_comp else 0.0,
    )


@dataclass
class ComparisonReport:
    dynamic: Metrics
    static: Metrics
    deltas: dict[str, float | None]
    flags: dict[str, bool]

    def to_dict(self) -> dict:
        return {
            "dynamic": self.dynamic.to_dict(),
            "static": self.static.to_dict(),
            "deltas": self.deltas,
            "flags": self.flags,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ComparisonReport":
        obj = json.loads(text)
        return cls(Metrics(**obj["dynamic"]), Metrics(**obj["static"]), obj["deltas"], obj["flags"])

    def render_text(self) -> str:
        def fmt(v, spec=".3f"):
            return "n/a" if v is None else format(v, spec)

        rows = [
            ("recall", fmt(self.static.recall), fmt(self.dynamic.recall), fmt(self.deltas["recall"], "+.3f")),
            ("recall, any flagged record", fmt(self.static.recall_any_record), fmt(self.dynamic.recall_any_record),
             fmt(self.dynamic.recall_any_record - self.static.recall_any_record, "+.3f")),
            ("false positive rate", fmt(self.static.false_positive_rate), fmt(self.dynamic.false_positive_rate),
             fmt(self.deltas["false_positive_rate"], "+.3f")),
            ("mean containment (events)", fmt(self.static.mean_containment, ".2f"),
             fmt(self.dynamic.mean_containment, ".2f"), fmt(self.deltas["mean_containment"], "+.2f")),
            ("uncontained identities", str(self.static.uncontained), str(self.dynamic.uncontained),
             f"{self.dynamic.uncontained - self.static.uncontained:+d}"),
            ("throughput (events/s)", fmt(self.static.throughput, ".0f"), fmt(self.dynamic.throughput, ".0f"),
             fmt(self.deltas["throughput"], "+.0f")),
            ("latency proxy (us/event)", fmt(self.static.latency_us, ".1f"), fmt(self.dynamic.latency_us, ".1f"), ""),
        ]
        header = ("metric", "static", "dynamic", "delta")
        widths = [max(len(r[i]) for r in rows + [header]) for i in range(4)]
        lines = ["  ".join(h.ljust(widths[i]) if i == 0 else h.rjust(widths[i]) for i, h in enumerate(header))]
        lines.append("  ".join("-" * w for w in widths))
        for r in rows:
            lines.append("  ".join(c.ljust(widths[i]) if i == 0 else c.rjust(widths[i]) for i, c in enumerate(r)))
        lines.append("")
        for name, ok in self.flags.items():
            lines.append(f"{'PASS' if ok else 'FAIL'}  {name}")
        return "\n".join(lines) + "\n"


def _delta(a, b):
    return None if a is None or b is None else a - b


def compare(dynamic: Metrics, static: Metrics) -> ComparisonReport:
    deltas = {
        "recall": dynamic.recall - static.recall,
        "false_positive_rate": dynamic.false_positive_rate - static.false_positive_rate,
        "mean_containment": _delta(dynamic.mean_containment, static.mean_containment),
        "throughput": _delta(dynamic.throughput, static.throughput),
    }
    flags = {
        "dynamic_higher_recall": dynamic.recall > static.recall,
        "dynamic_lower_fpr": dynamic.false_positive_rate < static.false_positive_rate,
        "dynamic_recall_ge_0.9": dynamic.recall >= 0.9,
        "dynamic_fpr_le_0.05": dynamic.false_positive_rate <= 0.05,
        "dynamic_containment_le_15": dynamic.mean_containment is not None and dynamic.mean_containment <= 15,
    }
    return ComparisonReport(dynamic, static, deltas, flags)


def timed_replay(engine, events: Sequence[AccessEvent]) -> tuple[list[AuditRecord], float]:
    """Run an engine over events; returns (audit, events per second)."""
    process = engine.process_event
    t0 = time.perf_counter()
    audit = [process(e)[1] for e in events]
    elapsed = time.perf_counter() - t0
    return audit, (len(events) / elapsed if elapsed > 0 else float("inf"))
