"""Deterministic k-means over per-identity baseline means, and peer deviation."""

from __future__ import annotations

import json
import math
import random
from array import array
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from . import kernels

MAX_ITER = 100


@dataclass
class ClusterModel:
    k: int
    centroids: list[tuple[float, ...]]
    labels: list[int]
    inertia: float
    seed: int
    assignments: dict[str, int] = field(default_factory=dict)
    history: list[float] = field(default_factory=list)
    iterations: int = 0

    def to_dict(self, pseudonymize: Callable[[str], str] = str) -> dict:
        return {
            "k": self.k,
            "seed": self.seed,
            "centroids": [list(c) for c in self.centroids],
            "inertia": self.inertia,
            "assignments": {pseudonymize(i): c for i, c in sorted(self.assignments.items())},
        }

    def to_json(self, pseudonymize: Callable[[str], str] = str) -> str:
        return json.dumps(self.to_dict(pseudonymize), sort_keys=True, separators=(",", ":"))


def _sqdist(a: Sequence[float], b: Sequence[float]) -> float:
    s = 0.0
    for x, y in zip(a, b):
        t = x - y
        s += t * t
    return s


def _seed_centroids(pts: list[tuple[float, ...]], k: int, rng: random.Random) -> list[tuple[float, ...]]:
    """k-means++ seeding: each next centre drawn with probability ~ D(x)^2."""
    n = len(pts)
    chosen = [rng.randrange(n)]
    d2 = [_sqdist(p, pts[chosen[0]]) for p in pts]
    while len(chosen) < k:
        total = math.fsum(d2)
        if total <= 0.0:
            # remaining points coincide with chosen centres
            idx = next(i for i in range(n) if i not in chosen)
        else:
            r = rng.random() * total
            acc = 0.0
            idx = n - 1
            for i, w in enumerate(d2):
                acc += w
                if acc > r and w > 0.0:
                    idx = i
                    break
        chosen.append(idx)
        c = pts[idx]
        d2 = [min(old, _sqdist(p, c)) for old, p in zip(d2, pts)]
    return [pts[i] for i in chosen]


def _means(pts: list[tuple[float, ...]], labels: Sequence[int], k: int, dim: int) -> tuple[list[list[float]], list[int]]:
    sums = [[0.0] * dim for _ in range(k)]
    counts = [0] * k
    for p, c in zip(pts, labels):
        counts[c] += 1
        row = sums[c]
        for j in range(dim):
            row[j] += p[j]
    for c in range(k):
        if counts[c]:
            inv = counts[c]
            sums[c] = [s / inv for s in sums[c]]
    return sums, counts


def _inertia(pts, labels, centroids) -> float:
    return math.fsum(_sqdist(p, centroids[c]) for p, c in zip(pts, labels))


def _hartigan_pass(pts, labels: array, k: int, dim: int) -> bool:
    """Move single points between clusters while that strictly lowers inertia."""
    moved = False
    centroids, counts = _means(pts, labels, k, dim)
    for i, x in enumerate(pts):
        a = labels[i]
        na = counts[a]
        if na <= 1:
            continue
        cost_out = na / (na - 1) * _sqdist(x, centroids[a])
        best_b, best_gain = -1, 0.0
        for b in range(k):
            if b == a:
                continue
            nb = counts[b]
            gain = cost_out - nb / (nb + 1) * _sqdist(x, centroids[b])
            if gain > best_gain * (1 + 1e-12) + 1e-12:
                best_b, best_gain = b, gain
        if best_b >= 0:
            labels[i] = best_b
            moved = True
            centroids, counts = _means(pts, labels, k, dim)
    return moved


def kmeans(points: Sequence[Sequence[float]], k: int, seed: int = 0,
           max_iter: int = MAX_ITER) -> ClusterModel:
    """Lloyd iterations from k-means++ seeds, finished with single-point refinement.

    Lloyd stops once an assignment pass leaves every label unchanged (the
    centroids then move by exactly zero) or after ``max_iter`` updates.
    Deterministic for a given point order, ``k`` and ``seed``. The returned
    model is a Lloyd fixed point in which no single point can switch
    cluster and lower the inertia.
    """
    pts = [tuple(float(v) for v in p) for p in points]
    n = len(pts)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    dim = len(pts[0])
    if any(len(p) != dim for p in pts):
        raise ValueError("all points must have the same dimension")

    flat = array("d", (v for p in pts for v in p))
    rng = random.Random(seed)
    centroids = [list(c) for c in _seed_centroids(pts, k, rng)]
    labels = array("l", [0] * n)
    history: list[float] = []
    iterations = 0

    def assign() -> float:
        cflat = array("d", (v for c in centroids for v in c))
        return kernels.assign_nearest(flat, cflat, dim, labels)

    while True:
        inertia = assign()
        history.append(inertia)
        while iterations < max_iter:
            iterations += 1
            before = labels.tolist()
            new, counts = _means(pts, labels, k, dim)
            empties = [c for c in range(k) if counts[c] == 0]
            if empties:
                far = sorted(range(n), key=lambda i: (-_sqdist(pts[i], centroids[labels[i]]), i))
                for c, i in zip(empties, far):
                    labels[i] = c
                new, counts = _means(pts, labels, k, dim)
            centroids = new
            inertia = assign()
            history.append(inertia)
            # unchanged labels: the next update would move nothing (exact fixed point)
            if labels.tolist() == before:
                break
        centroids, _ = _means(pts, labels, k, dim)
        if iterations >= max_iter or not _hartigan_pass(pts, labels, k, dim):
            break
        centroids, _ = _means(pts, labels, k, dim)
        history.append(_inertia(pts, labels, centroids))

    centroids, _ = _means(pts, labels, k, dim)
    inertia = _inertia(pts, labels, centroids)
    return ClusterModel(
        k=k,
        centroids=[tuple(c) for c in centroids],
        labels=labels.tolist(),
        inertia=inertia,
        seed=seed,
        history=history,
        iterations=iterations,
    )


def cluster_identities(means: Mapping[str, Sequence[float]], k: int, seed: int = 0) -> ClusterModel:
    """Cluster identities by their baseline mean vectors (sorted by id for determinism)."""
    ids = sorted(means)
    model = kmeans([means[i] for i in ids], min(k, len(ids)), seed)
    model.assignments = dict(zip(ids, model.labels))
    return model


def peer_deviation(identity_mean: Sequence[float], model: ClusterModel) -> float:
    """1 - exp(-d^2 / 2) for d the distance to the nearest centroid."""
    if not model.centroids:
        raise ValueError("cluster model has no centroids")
    d2 = min(_sqdist(identity_mean, c) for c in model.centroids)
    return -math.expm1(-d2 / 2.0)
