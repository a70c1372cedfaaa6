"""Contextual score C, risk aggregation and tiered access decisions."""

from __future__ import annotations

import ipaddress
import math
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from typing import Iterable, Sequence

from . import kernels
from .errors import ConfigError
from .events import AccessEvent, IdentityState

WEIGHT_TOLERANCE = 1e-9

DEFAULT_FACTOR_WEIGHTS = {
    "unknown_device": 0.25,
    "unfamiliar_location": 0.25,
    "off_hours": 0.15,
    "untrusted_ip": 0.35,
}


class Tier(IntEnum):
    ALLOW = 0
    STEP_UP = 1
    RESTRICT = 2
    QUARANTINE = 3

    @property
    def label(self) -> str:
        return _TIER_LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> "Tier":
        try:
            return _TIERS_BY_LABEL[label]
        except KeyError:
            raise ValueError(f"unknown tier {label!r}") from None


_TIER_LABELS = {
    Tier.ALLOW: "Allow",
    Tier.STEP_UP: "StepUp",
    Tier.RESTRICT: "Restrict",
    Tier.QUARANTINE: "Quarantine",
}
_TIERS_BY_LABEL = {v: k for k, v in _TIER_LABELS.items()}


@dataclass(frozen=True, slots=True)
class GeoBox:
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def contains(self, lat: float, lon: float) -> bool:
        return self.lat_min <= lat <= self.lat_max and self.lon_min <= lon <= self.lon_max


@lru_cache(maxsize=65536)
def _ip_to_int(ip: str) -> int:
    a, b, c, d = (int(p) for p in ip.split("."))
    return (a << 24) | (b << 16) | (c << 8) | d


class PrefixSet:
    """Set of IPv4 prefixes with a cached membership test."""

    def __init__(self, prefixes: Iterable[str] = ()):
        self.prefixes: tuple[str, ...] = tuple(prefixes)
        nets = []
        for p in self.prefixes:
            try:
                net = ipaddress.IPv4Network(p, strict=False)
            except ValueError as exc:
                raise ConfigError(f"bad IPv4 prefix {p!r}: {exc}") from None
            nets.append((int(net.network_address), int(net.netmask)))
        self._nets = tuple(nets)
        self._hits: dict[str, bool] = {}

    def __contains__(self, ip: str) -> bool:
        hit = self._hits.get(ip)
        if hit is None:
            value = _ip_to_int(ip)
            hit = any((value & mask) == addr for addr, mask in self._nets)
            self._hits[ip] = hit
        return hit

    def __bool__(self) -> bool:
        return bool(self._nets)


@dataclass
class ContextConfig:
    business_hours: tuple[int, int] = (8, 18)
    factor_weights: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_FACTOR_WEIGHTS))
    familiar_radius_km: float = 500.0
    blocklist: tuple[str, ...] = ()
    # soft intel: matches raise the untrusted_ip indicator instead of saturating C
    watchlist: tuple[str, ...] = ()
    blocked_regions: tuple[GeoBox, ...] = ()

    def __post_init__(self):
        self.business_hours = tuple(self.business_hours)
        self.blocklist = tuple(self.blocklist)
        self.watchlist = tuple(self.watchlist)
        self.blocked_regions = tuple(
            b if isinstance(b, GeoBox) else GeoBox(*b) for b in self.blocked_regions
        )
        self.validate()
        self._blocked_ips = PrefixSet(self.blocklist)
        self._watched_ips = PrefixSet(self.watchlist)

    def validate(self) -> None:
        start, end = self.business_hours
        if not 0 <= start < end <= 24:
            raise ConfigError(f"business_hours must satisfy 0 <= start < end <= 24, got {self.business_hours}")
        unknown = set(self.factor_weights) - set(DEFAULT_FACTOR_WEIGHTS)
        if unknown:
            raise ConfigError(f"unknown context factors: {sorted(unknown)}")
        missing = set(DEFAULT_FACTOR_WEIGHTS) - set(self.factor_weights)
        if missing:
            raise ConfigError(f"missing context factor weights: {sorted(missing)}")
        if any(w < 0 for w in self.factor_weights.values()):
            raise ConfigError("context factor weights must be non-negative")
        if abs(sum(self.factor_weights.values()) - 1.0) > WEIGHT_TOLERANCE:
            raise ConfigError("context factor weights must sum to 1")
        if self.familiar_radius_km < 0:
            raise ConfigError("familiar_radius_km must be non-negative")

    def ip_blocked(self, ip: str) -> bool:
        return ip in self._blocked_ips

    def ip_watched(self, ip: str) -> bool:
        return ip in self._watched_ips

    def in_blocked_region(self, lat: float, lon: float) -> bool:
        return any(box.contains(lat, lon) for box in self.blocked_regions)

    def within_business_hours(self, timestamp: int) -> bool:
        hour = (timestamp % 86400) / 3600.0
        start, end = self.business_hours
        return start <= hour < end

    def to_dict(self) -> dict:
        return {
            "business_hours": list(self.business_hours),
            "factor_weights": dict(self.factor_weights),
            "familiar_radius_km": self.familiar_radius_km,
            "blocklist": list(self.blocklist),
            "watchlist": list(self.watchlist),
            "blocked_regions": [
                [b.lat_min, b.lat_max, b.lon_min, b.lon_max] for b in self.blocked_regions
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ContextConfig":
        weights = dict(DEFAULT_FACTOR_WEIGHTS)
        weights.update(obj.get("factor_weights", {}))
        return cls(
            business_hours=tuple(obj.get("business_hours", (8, 18))),
            factor_weights=weights,
            familiar_radius_km=float(obj.get("familiar_radius_km", 500.0)),
            blocklist=tuple(obj.get("blocklist", ())),
            watchlist=tuple(obj.get("watchlist", ())),
            blocked_regions=tuple(GeoBox(*b) for b in obj.get("blocked_regions", ())),
        )


@dataclass(frozen=True, slots=True)
class ContextResult:
    """C together with the indicators that produced it."""

    score: float
    indicators: dict[str, float]
    saturated_by: str | None = None

    def reasons(self) -> list[str]:
        if self.saturated_by is not None:
            return [self.saturated_by]
        return [name for name, g in self.indicators.items() if g]


def _unfamiliar(event: AccessEvent, state: IdentityState, radius_km: float) -> bool:
    if not state.login_locations:
        return False
    lat, lon = event.lat, event.lon
    hav = kernels.haversine_km
    # most recent first: the usual benign case exits on the first comparison
    for _, plat, plon in reversed(state.login_locations):
        if hav(plat, plon, lat, lon) <= radius_km:
            return False
    return True


def assess_context(event: AccessEvent, state: IdentityState, config: ContextConfig) -> ContextResult:
    if config.ip_blocked(event.source_ip):
        return ContextResult(1.0, {}, "blocklisted_ip")
    if config.blocked_regions and config.in_blocked_region(event.lat, event.lon):
        return ContextResult(1.0, {}, "blocked_region")
    indicators = {
        # no device history yet: nothing for the device to be unknown against
        "unknown_device": 1.0 if state.known_devices and event.device_id not in state.known_devices else 0.0,
        "unfamiliar_location": 1.0 if _unfamiliar(event, state, config.familiar_radius_km) else 0.0,
        "off_hours": 0.0 if config.within_business_hours(event.timestamp) else 1.0,
        "untrusted_ip": 1.0 if config.ip_watched(event.source_ip) else 0.0,
    }
    w = config.factor_weights
    score = 0.0
    for name, g in indicators.items():
        score += w[name] * g
    return ContextResult(min(1.0, score), indicators)


def contextual_score(event: AccessEvent, state: IdentityState, config: ContextConfig) -> float:
    return assess_context(event, state, config).score


def _check_weights(weights: Sequence[float]) -> None:
    if any(not w >= 0.0 for w in weights):
        raise ConfigError(f"weights must be non-negative, got {list(weights)}")
    if abs(math.fsum(weights) - 1.0) > WEIGHT_TOLERANCE:
        raise ConfigError(f"weights must sum to 1, got {math.fsum(weights)!r}")


def risk_score(A: float, C: float, w1: float, w2: float) -> float:
    """R = w1*A + w2*C."""
    _check_weights((w1, w2))
    return w1 * A + w2 * C


def aggregate_risk(factors: Iterable[tuple[float, float]]) -> float:
    """R = sum of w_i * f_i over ``(f_i, w_i)`` pairs whose weights sum to 1."""
    factors = list(factors)
    _check_weights([w for _, w in factors])
    r = 0.0
    for f, w in factors:
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"factor value {f!r} outside [0, 1]")
        r += w * f
    return r


@dataclass(frozen=True, slots=True)
class RiskAssessment:
    A: float
    C: float
    w1: float
    w2: float
    R: float
    factors: tuple[tuple[str, float, float], ...] = ()

    @property
    def n(self) -> int:
        return len(self.factors)


@dataclass(frozen=True, slots=True)
class Thresholds:
    stepup: float = 0.5
    restrict: float = 0.7
    quarantine: float = 0.85

    def __post_init__(self):
        if not 0.0 < self.stepup < self.restrict < self.quarantine < 1.0:
            raise ConfigError(
                "thresholds must satisfy 0 < stepup < restrict < quarantine < 1, "
                f"got {self.stepup}, {self.restrict}, {self.quarantine}"
            )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.stepup, self.restrict, self.quarantine)

    def for_tier(self, tier: Tier) -> float:
        return {Tier.STEP_UP: self.stepup, Tier.RESTRICT: self.restrict,
                Tier.QUARANTINE: self.quarantine}[tier]


@dataclass(slots=True)
class Decision:
    tier: Tier
    reasons: list[str]
    risk: RiskAssessment | None = None


def decide(R: float, thresholds: Thresholds, quarantined: bool = False) -> Decision:
    """Tier for risk ``R``; each threshold fires only when strictly exceeded."""
    if quarantined:
        return Decision(Tier.QUARANTINE, ["quarantined"])
    if R > thresholds.quarantine:
        return Decision(Tier.QUARANTINE, ["risk_above_quarantine"])
    if R > thresholds.restrict:
        return Decision(Tier.RESTRICT, ["risk_above_restrict"])
    if R > thresholds.stepup:
        return Decision(Tier.STEP_UP, ["risk_above_stepup"])
    return Decision(Tier.ALLOW, [])
