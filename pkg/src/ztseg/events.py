"""Access-event data model, event-log parsing and identifier pseudonymisation."""

from __future__ import annotations

import hashlib
import json
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable, Iterator, NewType, Union

from .errors import ConfigError, OrderingError, ParseError

LOGIN_HISTORY_CAP = 100

Pseudonym = NewType("Pseudonym", str)

_REQUIRED_KEYS = (
    "event_id",
    "identity_id",
    "timestamp",
    "resource_id",
    "action",
    "lat",
    "lon",
    "device_id",
    "source_ip",
    "success",
)


class Action(str, Enum):
    LOGIN = "Login"
    READ = "Read"
    WRITE = "Write"
    ADMIN = "Admin"


@dataclass(frozen=True, slots=True)
class AccessEvent:
    """One authenticated action attempt (one event per request)."""

    event_id: str
    identity_id: str
    timestamp: int
    resource_id: str
    action: Action
    lat: float
    lon: float
    device_id: str
    source_ip: str
    success: bool = True

    def to_dict(self) -> dict:
        return {
            "event_id": self.event_id,
            "identity_id": self.identity_id,
            "timestamp": self.timestamp,
            "resource_id": self.resource_id,
            "action": self.action.value,
            "lat": self.lat,
            "lon": self.lon,
            "device_id": self.device_id,
            "source_ip": self.source_ip,
            "success": self.success,
        }


@dataclass(slots=True)
class DeviceSighting:
    first_seen: int
    last_seen: int
    count: int = 1


@dataclass
class IdentityState:
    """Per-identity history used by feature extraction and context scoring.

    ``login_locations`` holds ``(timestamp, lat, lon)`` of successful logins,
    oldest first, capped at the most recent 100.
    """

    identity_id: str
    known_devices: dict[str, DeviceSighting] = field(default_factory=dict)
    login_locations: deque = field(default_factory=lambda: deque(maxlen=LOGIN_HISTORY_CAP))
    resource_counts: dict[str, int] = field(default_factory=dict)
    event_count: int = 0
    quarantined: bool = False
    last_timestamp: int = 0
    _lat_sum: float = field(default=0.0, repr=False)
    _lon_sum: float = field(default=0.0, repr=False)

    def device_count(self, device_id: str) -> int:
        seen = self.known_devices.get(device_id)
        return seen.count if seen is not None else 0

    def login_centroid(self) -> tuple[float, float] | None:
        """Arithmetic mean of the retained login coordinates."""
        n = len(self.login_locations)
        if n == 0:
            return None
        return self._lat_sum / n, self._lon_sum / n

    def last_login(self) -> tuple[int, float, float] | None:
        return self.login_locations[-1] if self.login_locations else None

    def register_device(self, device_id: str, timestamp: int) -> None:
        seen = self.known_devices.get(device_id)
        if seen is None:
            self.known_devices[device_id] = DeviceSighting(timestamp, timestamp)
        else:
            seen.count += 1
            seen.last_seen = timestamp

    def add_login(self, timestamp: int, lat: float, lon: float) -> None:
        locs = self.login_locations
        if len(locs) == locs.maxlen:
            _, old_lat, old_lon = locs[0]
            self._lat_sum -= old_lat
            self._lon_sum -= old_lon
        locs.append((timestamp, lat, lon))
        self._lat_sum += lat
        self._lon_sum += lon

    def observe(self, event: AccessEvent) -> None:
        """Fold an event into the history (after it has been scored)."""
        self.event_count += 1
        self.last_timestamp = event.timestamp
        self.register_device(event.device_id, event.timestamp)
        self.resource_counts[event.resource_id] = self.resource_counts.get(event.resource_id, 0) + 1
        if event.action is Action.LOGIN and event.success:
            self.add_login(event.timestamp, event.lat, event.lon)


def _is_ipv4(text: object) -> bool:
    if not isinstance(text, str):
        return False
    parts = text.split(".")
    if len(parts) != 4:
        return False
    for p in parts:
        if not p.isdigit() or not p.isascii() or len(p) > 3 or int(p) > 255:
            return False
    return True


def _in_range(value: object, lo: float, hi: float) -> bool:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return False
    return lo <= value <= hi


def validate_event(event: AccessEvent) -> list[str]:
    """Return every violated invariant; an empty list means the event is valid.

    Never raises, whatever the field contents.
    """
    problems: list[str] = []
    for name in ("event_id", "identity_id", "resource_id", "device_id"):
        value = getattr(event, name, None)
        if not isinstance(value, str) or not value:
            problems.append(f"{name} is empty")
    ts = getattr(event, "timestamp", None)
    if isinstance(ts, bool) or not isinstance(ts, int):
        problems.append("timestamp is not an integer")
    elif ts <= 0:
        problems.append("timestamp must be positive")
    if not _in_range(getattr(event, "lat", None), -90.0, 90.0):
        problems.append("latitude out of range")
    if not _in_range(getattr(event, "lon", None), -180.0, 180.0):
        problems.append("longitude out of range")
    if not isinstance(getattr(event, "action", None), Action):
        problems.append("action is not one of Login, Read, Write, Admin")
    if not _is_ipv4(getattr(event, "source_ip", None)):
        problems.append("source_ip is not an IPv4 dotted quad")
    if not isinstance(getattr(event, "success", None), bool):
        problems.append("success is not a boolean")
    return problems


def event_from_dict(obj: dict) -> AccessEvent:
    missing = [k for k in _REQUIRED_KEYS if k not in obj]
    if missing:
        raise ValueError(f"missing keys: {', '.join(missing)}")
    try:
        action = Action(obj["action"])
    except ValueError:
        raise ValueError(f"unknown action {obj['action']!r}") from None
    lat, lon = obj["lat"], obj["lon"]
    for name, v in (("lat", lat), ("lon", lon)):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ValueError(f"{name} is not a finite number")
    return AccessEvent(
        event_id=obj["event_id"],
        identity_id=obj["identity_id"],
        timestamp=obj["timestamp"],
        resource_id=obj["resource_id"],
        action=action,
        lat=float(lat),
        lon=float(lon),
        device_id=obj["device_id"],
        source_ip=obj["source_ip"],
        success=obj["success"],
    )


def iter_event_log(source: Union[bytes, str, IO, Iterable]) -> Iterator[AccessEvent]:
    """Stream events from JSON Lines, enforcing validity and per-identity order."""
    if isinstance(source, (bytes, str)):
        source = source.splitlines()
    seen_ids: set[str] = set()
    last_ts: dict[str, int] = {}
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ParseError(lineno, f"invalid UTF-8: {exc}") from None
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"malformed JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise ParseError(lineno, "line is not a JSON object")
        try:
            event = event_from_dict(obj)
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        problems = validate_event(event)
        if problems:
            raise ParseError(lineno, "; ".join(problems))
        if event.event_id in seen_ids:
            raise ParseError(lineno, f"duplicate event_id {event.event_id!r}")
        seen_ids.add(event.event_id)
        prev = last_ts.get(event.identity_id)
        if prev is not None and event.timestamp < prev:
            raise OrderingError(
                event.event_id,
                f"timestamp {event.timestamp} precedes {prev} for identity {event.identity_id!r}",
                line=lineno,
            )
        last_ts[event.identity_id] = event.timestamp
        yield event


def parse_event_log(source: Union[bytes, str, IO, Iterable]) -> list[AccessEvent]:
    return list(iter_event_log(source))


def serialize_events(events: Iterable[AccessEvent]) -> bytes:
    lines = [json.dumps(e.to_dict(), separators=(",", ":")) for e in events]
    return "".join(line + "\n" for line in lines).encode("utf-8")


def pseudonymize(identifier: str, salt: str) -> Pseudonym:
    """First 128 bits (32 hex chars) of SHA-256(salt + ":" + identifier)."""
    if not salt:
        raise ConfigError("pseudonymisation salt must be non-empty")
    digest = hashlib.sha256(f"{salt}:{identifier}".encode("utf-8")).hexdigest()
    return Pseudonym(digest[:32])


class Pseudonymizer:
    """Caching wrapper around :func:`pseudonymize` for a fixed salt."""

    def __init__(self, salt: str):
        if not salt:
            raise ConfigError("pseudonymisation salt must be non-empty")
        self.salt = salt
        self._cache: dict[str, Pseudonym] = {}

    def __call__(self, identifier: str) -> Pseudonym:
        token = self._cache.get(identifier)
        if token is None:
            token = pseudonymize(identifier, self.salt)
            self._cache[identifier] = token
        return token
