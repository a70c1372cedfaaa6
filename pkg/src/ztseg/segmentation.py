"""Identity-resource access graph, impossible-travel checks and quarantine."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from . import kernels
from .errors import StateError
from .events import AccessEvent, Action, IdentityState

DEFAULT_MAX_SPEED_KMH = 900.0
DEFAULT_MIN_DISTANCE_KM = 100.0

Geo = tuple[float, float]


def haversine_km(a: Geo, b: Geo) -> float:
    """Great-circle distance on a sphere of radius 6371 km."""
    return kernels.haversine_km(a[0], a[1], b[0], b[1])


@dataclass(frozen=True, slots=True)
class TravelCheck:
    speed_kmh: float
    distance_km: float
    elapsed_s: int
    flagged: bool


NO_TRAVEL = TravelCheck(0.0, 0.0, 0, False)


def detect_impossible_travel(
    state: IdentityState,
    event: AccessEvent,
    max_speed_kmh: float = DEFAULT_MAX_SPEED_KMH,
    min_distance_km: float = DEFAULT_MIN_DISTANCE_KM,
) -> TravelCheck:
    """Compare a login with the identity's most recent prior login.

    Simultaneous logins more than ``min_distance_km`` apart report an
    infinite speed and are flagged.
    """
    if event.action is not Action.LOGIN:
        raise ValueError("impossible-travel check applies to Login events only")
    prior = state.last_login()
    if prior is None:
        return NO_TRAVEL
    prior_ts, plat, plon = prior
    elapsed = max(0, event.timestamp - prior_ts)
    distance = kernels.haversine_km(plat, plon, event.lat, event.lon)
    if elapsed == 0:
        speed = math.inf if distance > 0.0 else 0.0
    else:
        speed = distance / (elapsed / 3600.0)
    flagged = distance > min_distance_km and speed > max_speed_kmh
    return TravelCheck(speed, distance, elapsed, flagged)


@dataclass(slots=True)
class Edge:
    access_count: int
    last_timestamp: int
    active: bool = True


@dataclass(frozen=True, slots=True)
class Containment:
    identity_id: str
    timestamp: int
    deactivated: tuple[str, ...]


@dataclass
class AccessGraph:
    """Bipartite graph of identities and resources.

    Edges are never deleted; quarantine flips them inactive so that
    release can restore exactly the set it severed.
    """

    identities: set[str] = field(default_factory=set)
    resources: set[str] = field(default_factory=set)
    edges: dict[tuple[str, str], Edge] = field(default_factory=dict)
    adjacency: dict[str, set[str]] = field(default_factory=dict)
    quarantined: dict[str, Containment] = field(default_factory=dict)

    def _add_identity(self, identity_id: str) -> None:
        if identity_id not in self.identities:
            self.identities.add(identity_id)
            self.adjacency[identity_id] = set()

    def record_access(self, event: AccessEvent) -> Edge:
        self._add_identity(event.identity_id)
        self.resources.add(event.resource_id)
        key = (event.identity_id, event.resource_id)
        edge = self.edges.get(key)
        if edge is None:
            edge = Edge(1, event.timestamp, event.identity_id not in self.quarantined)
            self.edges[key] = edge
            self.adjacency[event.identity_id].add(event.resource_id)
        else:
            edge.access_count += 1
            if event.timestamp > edge.last_timestamp:
                edge.last_timestamp = event.timestamp
        return edge

    def is_quarantined(self, identity_id: str) -> bool:
        return identity_id in self.quarantined

    def quarantine(self, identity_id: str, timestamp: int) -> list[str]:
        """Sever every active edge of ``identity_id``.

        Returns the resources whose edges were deactivated; a repeat call
        returns an empty list.
        """
        self._add_identity(identity_id)
        if identity_id in self.quarantined:
            return []
        severed = []
        for resource in sorted(self.adjacency[identity_id]):
            edge = self.edges[(identity_id, resource)]
            if edge.active:
                edge.active = False
                severed.append(resource)
        self.quarantined[identity_id] = Containment(identity_id, timestamp, tuple(severed))
        return severed

    def release(self, identity_id: str) -> None:
        record = self.quarantined.pop(identity_id, None)
        if record is None:
            raise StateError(f"identity {identity_id!r} is not quarantined")
        for resource in record.deactivated:
            self.edges[(identity_id, resource)].active = True

    def blast_radius(self, identity_id: str) -> set[str]:
        """Resources one hop from the identity over active edges."""
        out = set()
        for resource in self.adjacency.get(identity_id, ()):
            if self.edges[(identity_id, resource)].active:
                out.add(resource)
        return out

    def shared_resource_exposure(self, identity_id: str) -> set[str]:
        """Identities sharing at least one active resource with ``identity_id``."""
        mine = self.blast_radius(identity_id)
        if not mine:
            return set()
        return {
            other
            for other in self.identities
            if other != identity_id and not mine.isdisjoint(self.blast_radius(other))
        }

    def snapshot(self, pseudonymize: Callable[[str], str] = str) -> dict:
        edges = [
            {
                "identity": pseudonymize(i),
                "resource": r,
                "count": e.access_count,
                "last_timestamp": e.last_timestamp,
                "active": e.active,
            }
            for (i, r), e in self.edges.items()
        ]
        edges.sort(key=lambda d: (d["identity"], d["resource"]))
        return {
            "identities": sorted(pseudonymize(i) for i in self.identities),
            "resources": sorted(self.resources),
            "edges": edges,
            "quarantine": sorted(
                ({"identity": pseudonymize(c.identity_id), "timestamp": c.timestamp}
                 for c in self.quarantined.values()),
                key=lambda d: d["identity"],
            ),
        }
