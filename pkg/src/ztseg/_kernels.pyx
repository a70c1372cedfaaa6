# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numeric kernels. Same contracts as ``_kernels_py``."""

from libc.math cimport asin, cos, sin, sqrt, M_PI

cdef double EARTH_RADIUS_KM = 6371.0
cdef double DEG = M_PI / 180.0

cdef enum:
    MAX_DIM = 16


cpdef double haversine_km(double lat1, double lon1, double lat2, double lon2):
    cdef double p1 = lat1 * DEG
    cdef double p2 = lat2 * DEG
    cdef double sdp = sin((p2 - p1) * 0.5)
    cdef double sdl = sin((lon2 - lon1) * DEG * 0.5)
    cdef double h = sdp * sdp + cos(p1) * cos(p2) * sdl * sdl
    if h > 1.0:
        h = 1.0
    return 2.0 * EARTH_RADIUS_KM * asin(sqrt(h))


cpdef void welford_update(double[::1] mean, double[::1] m2, long n_before, double[::1] x):
    cdef Py_ssize_t dim = mean.shape[0]
    cdef Py_ssize_t i, j
    cdef double n = n_before + 1
    cdef double scale = n_before / n
    cdef double delta[MAX_DIM]
    cdef double di, v
    if dim > MAX_DIM:
        raise ValueError("dimension too large for compiled kernel")
    for i in range(dim):
        delta[i] = x[i] - mean[i]
        mean[i] += delta[i] / n
    for i in range(dim):
        di = delta[i] * scale
        for j in range(i, dim):
            v = m2[i * dim + j] + di * delta[j]
            m2[i * dim + j] = v
            m2[j * dim + i] = v


cpdef double mahalanobis_sq(double[::1] x, double[::1] mean, double[::1] cov,
                            double scale, double eps):
    cdef Py_ssize_t dim = mean.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double L[MAX_DIM * MAX_DIM]
    cdef double y[MAX_DIM]
    cdef double s, total = 0.0
    if dim > MAX_DIM:
        raise ValueError("dimension too large for compiled kernel")
    for i in range(dim):
        for j in range(i + 1):
            s = scale * cov[i * dim + j]
            if i == j:
                s += eps
            for k in range(j):
                s -= L[i * dim + k] * L[j * dim + k]
            if i == j:
                if not s > 0.0:
                    return -1.0
                L[i * dim + i] = sqrt(s)
            else:
                L[i * dim + j] = s / L[j * dim + j]
    for i in range(dim):
        s = x[i] - mean[i]
        for k in range(i):
            s -= L[i * dim + k] * y[k]
        y[i] = s / L[i * dim + i]
        total += y[i] * y[i]
    return total


cpdef double assign_nearest(double[::1] points, double[::1] centroids, Py_ssize_t dim,
                            long[::1] labels):
    cdef Py_ssize_t n = points.shape[0] // dim
    cdef Py_ssize_t k = centroids.shape[0] // dim
    cdef Py_ssize_t p, c, j, best
    cdef double d, t, best_d, inertia = 0.0
    for p in range(n):
        best = -1
        best_d = 0.0
        for c in range(k):
            d = 0.0
            for j in range(dim):
                t = points[p * dim + j] - centroids[c * dim + j]
                d += t * t
            if best < 0 or d < best_d:
                best = c
                best_d = d
        labels[p] = best
        inertia += best_d
    return inertia
