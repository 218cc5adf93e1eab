"""Segment MLEs and the split likelihood-ratio statistic.

For a segment of ``n`` observations split after ``m1`` of them, the
statistic is::

    lrt[m1] = n ln(var) - m1 ln(var_left) - m2 ln(var_right)

with all variances maximum-likelihood estimates (divisor = count).  It is
minus twice the log of the likelihood ratio of "one regime" against "two
regimes", so it is nonnegative.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels

#: Relative degeneracy floor: variances below this fraction of the pooled
#: variance are raised to it before taking logs.
VARIANCE_FLOOR = 1e-12

#: Shortest segment a split scan accepts (two observations per side).
MIN_SCAN_LENGTH = 4

_LOG_2PI = float(np.log(2.0 * np.pi))


class SegmentTooShortError(ValueError):
    """Raised when a segment is too short to carry an admissible split."""


def as_series(values) -> np.ndarray:
    """Validate ``values`` as a one-dimensional array of finite floats."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"series must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("series is empty")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise ValueError(f"series value at index {bad} is not finite")
    return arr


def _check_range(m: int, lo: int, hi: Optional[int]) -> tuple[int, int]:
    hi = m if hi is None else hi
    if not (0 <= lo < hi <= m):
        raise ValueError(f"invalid segment [{lo}, {hi}) for a series of length {m}")
    return lo, hi


@dataclass(frozen=True)
class SegmentStats:
    """Maximum-likelihood summary of one segment."""

    n: int
    mean: float
    variance_mle: float
    loglik: float
    degenerate: bool = False


def segment_stats(series, lo: int = 0, hi: Optional[int] = None) -> SegmentStats:
    """MLE mean, variance and maximized Gaussian log-likelihood of ``series[lo:hi]``.

    The variance floor is relative to the pooled variance of the whole
    ``series``; a segment whose variance falls below it is evaluated at the
    floor and flagged ``degenerate``.
    """
    x = as_series(series)
    lo, hi = _check_range(x.size, lo, hi)
    seg = x[lo:hi]
    n = seg.size
    mean = float(seg.mean())
    var = float(np.mean((seg - mean) ** 2))

    floor = VARIANCE_FLOOR * float(np.var(x))
    if floor <= 0.0:
        # constant series: keep the log finite
        floor = np.finfo(np.float64).tiny
    degenerate = var < floor
    used = floor if degenerate else var
    loglik = -0.5 * n * _LOG_2PI - 0.5 * n * np.log(used) - 0.5 * n
    return SegmentStats(n=n, mean=mean, variance_mle=var, loglik=float(loglik), degenerate=bool(degenerate))


@dataclass
class SplitStatistics:
    """Split statistics for every admissible ``m1`` of one segment.

    ``lrt[i]`` and ``nlrt[i]`` refer to ``m1 = i + 2``.  ``nlrt``,
    ``argmax_m1`` and ``max_nlrt`` stay ``None`` until the profile has been
    normalized.
    """

    segment_offset: int
    segment_length: int
    lrt: np.ndarray
    nlrt: Optional[np.ndarray] = None
    argmax_m1: Optional[int] = None
    max_nlrt: Optional[float] = None

    @property
    def m1(self) -> np.ndarray:
        return np.arange(2, self.segment_length - 1)

    @property
    def constant(self) -> bool:
        return not np.any(self.lrt)


def split_scan(series, lo: int = 0, hi: Optional[int] = None) -> SplitStatistics:
    """Split statistic for every ``m1`` in ``[2, n-2]`` of ``series[lo:hi]``.

    One pass over prefix sums, O(n).  A constant segment yields all zeros.

    Raises
    ------
    SegmentTooShortError
        If the segment has fewer than four observations.
    """
    x = as_series(series)
    lo, hi = _check_range(x.size, lo, hi)
    n = hi - lo
    if n < MIN_SCAN_LENGTH:
        raise SegmentTooShortError(f"segment of length {n} has no admissible split (need >= {MIN_SCAN_LENGTH})")
    lrt = kernels.lrt_profile(np.ascontiguousarray(x[lo:hi]), VARIANCE_FLOOR)
    return SplitStatistics(segment_offset=lo, segment_length=n, lrt=lrt)


def null_profiles(block) -> np.ndarray:
    """Row-wise split statistics for a (replications, n) block of draws."""
    block = np.ascontiguousarray(block, dtype=np.float64)
    return kernels.lrt_profiles(block, VARIANCE_FLOOR)


def first_argmax(values) -> int:
    """Index of the maximum, ties resolved toward the smallest index."""
    return int(np.argmax(values))
