"""Pure-Python implementations of the numeric kernels.

Mirrors ``_kernels.pyx`` function for function. Buffers are any indexable
sequence of floats (``array.array('d')`` in practice); matrices are flat,
row-major.
"""

from __future__ import annotations

import math

EARTH_RADIUS_KM = 6371.0


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1 = math.radians(lat1)
    p2 = math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    h = math.sin(dp * 0.5) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl * 0.5) ** 2
    if h > 1.0:
        h = 1.0
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(h))


def welford_update(mean, m2, n_before: int, x) -> None:
    """Fold ``x`` into a running mean and co-moment matrix, in place.

    ``m2`` accumulates sum((x - mean)(x - mean)^T); only the upper triangle
    is computed and then mirrored, so the result is exactly symmetric.
    """
    dim = len(mean)
    n = n_before + 1
    delta = [x[i] - mean[i] for i in range(dim)]
    for i in range(dim):
        mean[i] += delta[i] / n
    scale = n_before / n
    for i in range(dim):
        di = delta[i] * scale
        row = i * dim
        for j in range(i, dim):
            v = m2[row + j] + di * delta[j]
            m2[row + j] = v
            m2[j * dim + i] = v


def mahalanobis_sq(x, mean, cov, scale: float, eps: float) -> float:
    """Squared Mahalanobis distance under ``scale * cov + eps * I``.

    Cholesky factorisation followed by a forward solve; no inverse is formed.
    Returns -1.0 when a pivot is not strictly positive.
    """
    dim = len(mean)
    L = [0.0] * (dim * dim)
    for i in range(dim):
        ri = i * dim
        for j in range(i + 1):
            rj = j * dim
            s = scale * cov[ri + j]
            if i == j:
                s += eps
            for k in range(j):
                s -= L[ri + k] * L[rj + k]
            if i == j:
                if not s > 0.0:
                    return -1.0
                L[ri + i] = math.sqrt(s)
            else:
                L[ri + j] = s / L[rj + j]
    total = 0.0
    y = [0.0] * dim
    for i in range(dim):
        ri = i * dim
        s = x[i] - mean[i]
        for k in range(i):
            s -= L[ri + k] * y[k]
        y[i] = s / L[ri + i]
        total += y[i] * y[i]
    return total


def assign_nearest(points, centroids, dim: int, labels) -> float:
    """Label each point with its nearest centroid (ties to the lower index).

    Returns the inertia of the resulting assignment.
    """
    n = len(points) // dim
    k = len(centroids) // dim
    inertia = 0.0
    for p in range(n):
        po = p * dim
        best = -1
        best_d = 0.0
        for c in range(k):
            co = c * dim
            d = 0.0
            for j in range(dim):
                t = points[po + j] - centroids[co + j]
                d += t * t
            if best < 0 or d < best_d:
                best = c
                best_d = d
        labels[p] = best
        inertia += best_d
    return inertia
