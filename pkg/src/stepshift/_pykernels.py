"""Pure NumPy split-scan kernels (reference implementation and fallback)."""

import numpy as np

_LD = np.longdouble


def _jensen_term(r, ratio):
    """``r - log(ratio)`` with ``ratio = 1 + r``; nonnegative.

    A series covers ``|r| < 1e-3``; elsewhere the ratio is used as given,
    since forming ``1 + r`` loses digits when ``r`` is close to -1.
    """
    r = r.astype(np.float64)
    small = np.abs(r) < 1e-3
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = r - np.log(ratio.astype(np.float64))
    series = r * r * (0.5 - r * (1.0 / 3 - r * (0.25 - r * (0.2 - r * (1.0 / 6 - r / 7)))))
    return np.where(small, series, direct)


def _running_moments(cols):
    """Welford means and centred sums of squares of every prefix, column-wise.

    ``cols`` has shape (n, reps); row ``k - 1`` of each output covers the
    first ``k`` observations.
    """
    n, reps = cols.shape
    means = np.empty((n, reps), dtype=_LD)
    m2s = np.empty((n, reps), dtype=_LD)
    mean = np.zeros(reps, dtype=_LD)
    m2 = np.zeros(reps, dtype=_LD)
    for k in range(1, n + 1):
        xk = cols[k - 1]
        d = xk - mean
        mean = mean + d / k
        m2 = m2 + d * (xk - mean)
        means[k - 1] = mean
        m2s[k - 1] = m2
    return means, m2s


def lrt_profiles(xs, rel_floor):
    """Split statistic for every m1 in [2, n-2], row-wise over ``xs``.

    Side moments come from forward (prefix) and backward (suffix) Welford
    passes in ``np.longdouble``.  Unfloored splits use the decomposition

        lrt = n log1p(B / vw) + m1 g(r1) + m2 g(r2),   g(r) = r - log1p(r)

    where ``vw`` is the within-side variance, ``B`` the between-means term
    and ``r_i = v_i / vw - 1``.  Every term is nonnegative, so small
    statistics keep their relative precision.
    """
    xs = np.asarray(xs, dtype=np.float64)
    reps, n = xs.shape
    if n < 4:
        raise ValueError("segment needs at least 4 observations")
    constant = xs.min(axis=1) == xs.max(axis=1)

    # shifting by the midrange makes x - c exact when the spread is tiny next to |x|
    c = 0.5 * xs.min(axis=1) + 0.5 * xs.max(axis=1)
    cols = xs.T.astype(_LD) - c.astype(_LD)
    fmean, fm2 = _running_moments(cols)
    bmean, bm2 = _running_moments(cols[::-1])

    m1 = np.arange(2, n - 1)
    m2 = n - m1
    # (k, reps) -> (reps, k) over admissible splits
    v1 = (fm2[m1 - 1] / m1[:, None]).T
    v2 = (bm2[m2 - 1] / m2[:, None]).T
    gap = (fmean[m1 - 1] - bmean[m2 - 1]).T
    v = (fm2[n - 1] / n)[:, None]

    with np.errstate(divide="ignore", invalid="ignore"):
        eps = rel_floor * v
        floored = (v1 < eps) | (v2 < eps)
        direct = n * np.log(v) - m1 * np.log(np.maximum(v1, eps)) - m2 * np.log(np.maximum(v2, eps))

        vw = (m1 * v1 + m2 * v2) / n
        dv = (v1 - v2) / vw
        between = (m1 * m2).astype(_LD) / (_LD(n) * n) * gap * gap
        stable = n * np.log1p((between / vw).astype(np.float64)) + (
            m1 * _jensen_term(dv * m2 / n, v1 / vw) + m2 * _jensen_term(-dv * m1 / n, v2 / vw)
        )

    stat = np.where(floored, direct, stable).astype(np.float64)
    stat = np.maximum(stat, 0.0)
    stat[constant] = 0.0
    return stat


def lrt_profile(x, rel_floor):
    """Split statistic for every m1 in [2, n-2] of a single segment."""
    x = np.asarray(x, dtype=np.float64)
    return lrt_profiles(x[np.newaxis, :], rel_floor)[0]
