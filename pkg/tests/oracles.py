"""Independent high-precision references used by the test suite."""

import mpmath
import numpy as np

mpmath.mp.dps = 50


def _mle_variance(values):
    mu = sum(values) / len(values)
    return sum((v - mu) ** 2 for v in values) / len(values)


def naive_lrt(x, rel_floor=1e-12):
    """Per-split recomputation of the means, MLE variances and split statistic.

    Works at 50 significant digits with two-pass variances, one split at a
    time, so it shares nothing with the prefix-sum kernels.
    """
    xs = [mpmath.mpf(float(v)) for v in x]
    n = len(xs)
    pooled = _mle_variance(xs)
    if pooled == 0:
        return np.zeros(n - 3)
    eps = mpmath.mpf(rel_floor) * pooled
    out = []
    for m1 in range(2, n - 1):
        v1 = max(_mle_variance(xs[:m1]), eps)
        v2 = max(_mle_variance(xs[m1:]), eps)
        out.append(float(n * mpmath.log(pooled) - m1 * mpmath.log(v1) - (n - m1) * mpmath.log(v2)))
    return np.array(out)
