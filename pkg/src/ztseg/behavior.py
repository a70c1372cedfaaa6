"""Behavioural features, streaming per-identity baselines and the anomaly score A."""

from __future__ import annotations

import math
from array import array
from dataclasses import dataclass, field
from typing import Sequence

from . import kernels
from .errors import NumericalError
from .events import AccessEvent, IdentityState

N_FEATURES = 6
DEFAULT_EPSILON = 1e-6
DEFAULT_WARMUP = 20
NEUTRAL_SCORE = 0.5

FEATURE_NAMES = (
    "hour_sin",
    "hour_cos",
    "weekend",
    "log_geo_km",
    "device_novelty",
    "resource_rarity",
)

_TWO_PI_OVER_DAY = 2.0 * math.pi / 86400.0


@dataclass(frozen=True, slots=True)
class FeatureVector:
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != N_FEATURES:
            raise ValueError(f"expected {N_FEATURES} components, got {len(self.values)}")

    def as_array(self) -> array:
        return array("d", self.values)

    def is_valid(self) -> bool:
        v = self.values
        if not all(math.isfinite(x) for x in v):
            return False
        return (
            -1.0 <= v[0] <= 1.0
            and -1.0 <= v[1] <= 1.0
            and v[2] in (0.0, 1.0)
            and v[3] >= 0.0
            and 0.0 <= v[4] <= 1.0
            and 0.0 <= v[5] <= 1.0
        )


def is_weekend(timestamp: int) -> bool:
    # 1970-01-01 was a Thursday; Monday == 0
    return (timestamp // 86400 + 3) % 7 >= 5


def extract_features(event: AccessEvent, state: IdentityState) -> FeatureVector:
    """Feature vector for ``event`` against the identity's history *before* it.

    Components: time of day on the unit circle, weekend flag, log distance
    from the centroid of prior logins, device novelty and resource rarity.
    """
    angle = (event.timestamp % 86400) * _TWO_PI_OVER_DAY
    centroid = state.login_centroid()
    if centroid is None:
        geo = 0.0
    else:
        geo = math.log1p(kernels.haversine_km(centroid[0], centroid[1], event.lat, event.lon))
    seen = state.device_count(event.device_id)
    novelty = 1.0 if seen == 0 else 1.0 / (1.0 + seen)
    rarity = 1.0 / (1.0 + state.resource_counts.get(event.resource_id, 0))
    return FeatureVector(
        (
            math.sin(angle),
            math.cos(angle),
            1.0 if is_weekend(event.timestamp) else 0.0,
            geo,
            novelty,
            rarity,
        )
    )


@dataclass
class BehaviorBaseline:
    """Running mean and co-moment of one identity's feature vectors.

    ``m2`` is the flat row-major sum of outer products of deviations; the
    sample covariance is ``m2 / (n - 1)`` (zero for ``n < 2``).
    """

    identity_id: str
    n: int = 0
    mean: array = field(default_factory=lambda: array("d", bytes(8 * N_FEATURES)))
    m2: array = field(default_factory=lambda: array("d", bytes(8 * N_FEATURES * N_FEATURES)))
    epsilon: float = DEFAULT_EPSILON

    @property
    def dim(self) -> int:
        return len(self.mean)

    def covariance(self) -> list[list[float]]:
        d = self.dim
        if self.n < 2:
            return [[0.0] * d for _ in range(d)]
        s = 1.0 / (self.n - 1)
        return [[self.m2[i * d + j] * s for j in range(d)] for i in range(d)]

    def regularized_covariance(self) -> list[list[float]]:
        """Covariance plus epsilon on the diagonal; exactly epsilon*I while n <= 1."""
        cov = self.covariance()
        for i in range(self.dim):
            cov[i][i] += self.epsilon
        return cov

    def to_dict(self) -> dict:
        return {
            "identity": self.identity_id,
            "n": self.n,
            "mean": list(self.mean),
            "covariance": [x for row in self.covariance() for x in row],
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "BehaviorBaseline":
        mean = array("d", obj["mean"])
        d = len(mean)
        n = int(obj["n"])
        cov = obj["covariance"]
        factor = float(n - 1) if n >= 2 else 0.0
        m2 = array("d", (float(c) * factor for c in cov)) if cov else array("d", bytes(8 * d * d))
        return cls(obj["identity"], n, mean, m2, float(obj.get("epsilon", DEFAULT_EPSILON)))


def update_baseline(baseline: BehaviorBaseline, fv: FeatureVector | Sequence[float]) -> BehaviorBaseline:
    """Welford update, in place. Returns the same baseline for chaining."""
    x = fv.as_array() if isinstance(fv, FeatureVector) else array("d", fv)
    kernels.welford_update(baseline.mean, baseline.m2, baseline.n, x)
    baseline.n += 1
    return baseline


def mahalanobis_distance(fv: FeatureVector | Sequence[float], baseline: BehaviorBaseline) -> float:
    x = fv.as_array() if isinstance(fv, FeatureVector) else array("d", fv)
    scale = 1.0 / (baseline.n - 1) if baseline.n >= 2 else 0.0
    d2 = kernels.mahalanobis_sq(x, baseline.mean, baseline.m2, scale, baseline.epsilon)
    if d2 < 0.0 or not math.isfinite(d2):
        raise NumericalError(
            f"Cholesky factorisation failed for baseline of {baseline.identity_id!r} (n={baseline.n})"
        )
    return math.sqrt(d2)


def mahalanobis(x: Sequence[float], mean: Sequence[float], cov: Sequence[Sequence[float]],
                epsilon: float = DEFAULT_EPSILON) -> float:
    """Distance of ``x`` from ``mean`` under an explicit covariance matrix."""
    flat = array("d", (float(c) for row in cov for c in row))
    d2 = kernels.mahalanobis_sq(array("d", x), array("d", mean), flat, 1.0, epsilon)
    if d2 < 0.0 or not math.isfinite(d2):
        raise NumericalError("covariance is not positive definite after regularisation")
    return math.sqrt(d2)


@dataclass(frozen=True, slots=True)
class AnomalyScore:
    distance: float
    score: float
    warmup: bool


def anomaly_score(distance: float, baseline: BehaviorBaseline,
                  warmup_threshold: int = DEFAULT_WARMUP) -> AnomalyScore:
    """Map a Mahalanobis distance to A in [0, 1].

    Neutral 0.5 until the baseline has ``warmup_threshold`` observations,
    then ``1 - exp(-d^2 / (2 m))`` with m the feature dimension.
    """
    if not distance >= 0.0:
        raise ValueError(f"distance must be non-negative, got {distance!r}")
    if baseline.n < warmup_threshold:
        return AnomalyScore(distance, NEUTRAL_SCORE, True)
    score = -math.expm1(-distance * distance / (2.0 * baseline.dim))
    return AnomalyScore(distance, score, False)
