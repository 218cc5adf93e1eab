"""Compiled split-scan kernels.

Both functions mirror :mod:`stepshift._pykernels`; the pure-Python module is
the reference and the fallback when this extension is absent.
"""

import numpy as np

from libc.math cimport fabs, log, log1p, logl
from libc.stdlib cimport free, malloc


cdef inline double _jensen_term(double r, double ratio) noexcept nogil:
    # r - log(ratio) with ratio = 1 + r, >= 0; series below 1e-3 avoids cancellation.
    # ratio is passed separately: 1 + r loses digits when r is close to -1
    if fabs(r) < 1e-3:
        return r * r * (0.5 - r * (1.0 / 3 - r * (0.25 - r * (0.2 - r * (1.0 / 6 - r / 7)))))
    return r - log(ratio)


cdef int _profile(const double[:] x, double rel_floor, double[:] out) noexcept nogil:
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, k, m1, m2
    cdef long double d, mean, m2sum, v, v1, v2, vw, dv, gap, between, stat, eps, c, xi
    cdef double lo = x[0], hi = x[0]
    cdef long double *buf
    cdef long double *fmean
    cdef long double *fm2
    cdef long double *bmean
    cdef long double *bm2

    for i in range(n):
        if x[i] < lo:
            lo = x[i]
        if x[i] > hi:
            hi = x[i]
    if lo == hi:
        for i in range(n - 3):
            out[i] = 0.0
        return 0

    # shifting by the midrange makes x - c exact when the spread is tiny next to |x|
    c = 0.5 * lo + 0.5 * hi

    # running means / centred sums of squares: prefixes of length k, suffixes of length k
    buf = <long double *> malloc(4 * (n + 1) * sizeof(long double))
    if buf == NULL:
        return -1
    fmean = buf
    fm2 = buf + (n + 1)
    bmean = buf + 2 * (n + 1)
    bm2 = buf + 3 * (n + 1)

    mean = 0.0
    m2sum = 0.0
    for k in range(1, n + 1):
        xi = x[k - 1] - c
        d = xi - mean
        mean += d / k
        m2sum += d * (xi - mean)
        fmean[k] = mean
        fm2[k] = m2sum
    mean = 0.0
    m2sum = 0.0
    for k in range(1, n + 1):
        xi = x[n - k] - c
        d = xi - mean
        mean += d / k
        m2sum += d * (xi - mean)
        bmean[k] = mean
        bm2[k] = m2sum

    v = fm2[n] / n
    eps = rel_floor * v
    for m1 in range(2, n - 1):
        m2 = n - m1
        v1 = fm2[m1] / m1
        v2 = bm2[m2] / m2
        if v1 < eps or v2 < eps:
            if v1 < eps:
                v1 = eps
            if v2 < eps:
                v2 = eps
            stat = n * logl(v) - m1 * logl(v1) - m2 * logl(v2)
        else:
            vw = (m1 * v1 + m2 * v2) / n
            dv = (v1 - v2) / vw
            gap = fmean[m1] - bmean[m2]
            between = (<long double>m1 * m2) / (<long double>n * n) * gap * gap
            stat = (n * log1p(<double>(between / vw))
                    + m1 * _jensen_term(<double>(dv * m2 / n), <double>(v1 / vw))
                    + m2 * _jensen_term(<double>(-dv * m1 / n), <double>(v2 / vw)))
        out[m1 - 2] = <double>stat if stat > 0.0 else 0.0
    free(buf)
    return 0


def lrt_profile(const double[:] x, double rel_floor):
    """Split statistic for every m1 in [2, n-2] of a single segment."""
    cdef Py_ssize_t n = x.shape[0]
    cdef int status
    if n < 4:
        raise ValueError("segment needs at least 4 observations")
    out = np.empty(n - 3, dtype=np.float64)
    cdef double[:] out_view = out
    with nogil:
        status = _profile(x, rel_floor, out_view)
    if status != 0:
        raise MemoryError()
    return out


def lrt_profiles(const double[:, :] xs, double rel_floor):
    """Row-wise :func:`lrt_profile` over a (replications, n) block."""
    cdef Py_ssize_t reps = xs.shape[0]
    cdef Py_ssize_t n = xs.shape[1]
    cdef Py_ssize_t r
    cdef int status = 0
    if n < 4:
        raise ValueError("segment needs at least 4 observations")
    out = np.empty((reps, n - 3), dtype=np.float64)
    cdef double[:, :] out_view = out
    with nogil:
        for r in range(reps):
            status = _profile(xs[r], rel_floor, out_view[r])
            if status != 0:
                break
    if status != 0:
        raise MemoryError()
    return out
