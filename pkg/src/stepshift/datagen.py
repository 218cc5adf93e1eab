"""Synthetic phase-I batches with alternating step shifts in the mean.

Regime ``r`` covers the 1-based observations ``tau[r-1] < t <= tau[r]``
with ``tau[0] = 0`` and ``tau[R+1] = m``.  Means alternate between ``mu0``
and ``mu0 + delta``.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import rng
from .fileio import FormatError, atomic_write, format_float


class InvalidDesign(ValueError):
    """The requested shift design leaves some regime empty or is malformed."""


@dataclass(frozen=True)
class ShiftDesign:
    m: int = 200
    R: int = 0
    mu0: float = 0.0
    delta: float = 1.0
    sigma: float = 1.0
    #: explicit change points; ``None`` means uniformly spaced
    locations: Optional[tuple] = None

    @property
    def boundaries(self) -> tuple:
        if self.locations is not None:
            return tuple(self.locations)
        # round(r*m/(R+1)) with halves rounded up, in exact integer arithmetic
        k = self.R + 1
        return tuple((2 * r * self.m + k) // (2 * k) for r in range(1, self.R + 1))

    @property
    def means(self) -> tuple:
        out = [self.mu0]
        for j in range(self.R):
            out.append(out[-1] + self.delta * (-1) ** j)
        return tuple(out)

    def regime_of(self, t: int) -> int:
        """Regime number (1-based) of 1-based observation ``t``."""
        return 1 + int(np.searchsorted(self.boundaries, t, side="left"))

    def mean_profile(self) -> np.ndarray:
        edges = (0, *self.boundaries, self.m)
        out = np.empty(self.m)
        for mu, a, b in zip(self.means, edges[:-1], edges[1:]):
            out[a:b] = mu
        return out

    def describe(self) -> str:
        return (
            f"m={self.m} R={self.R} mu0={format_float(self.mu0)} delta={format_float(self.delta)} "
            f"sigma={format_float(self.sigma)} boundaries={','.join(map(str, self.boundaries)) or '-'}"
        )


def _validate(d: ShiftDesign) -> ShiftDesign:
    if d.m < 4:
        raise InvalidDesign(f"m must be >= 4, got {d.m}")
    if d.R < 0:
        raise InvalidDesign(f"R must be >= 0, got {d.R}")
    if d.sigma <= 0:
        raise InvalidDesign(f"sigma must be > 0, got {d.sigma}")
    if d.R > 0 and d.delta <= 0:
        raise InvalidDesign(f"delta must be > 0 when R > 0, got {d.delta}")
    b = d.boundaries
    if len(b) != d.R:
        raise InvalidDesign(f"{len(b)} locations given for R={d.R}")
    edges = (0, *b, d.m)
    if any(lo >= hi for lo, hi in zip(edges[:-1], edges[1:])):
        raise InvalidDesign(f"R={d.R} shifts leave an empty regime in m={d.m} observations")
    return d


def design(m: int = 200, R: int = 0, mu0: float = 0.0, delta: float = 1.0, sigma: float = 1.0) -> ShiftDesign:
    """Uniformly spaced design: one shift at m/2, two at m/3 and 2m/3, and so on."""
    return _validate(ShiftDesign(m=m, R=R, mu0=mu0, delta=delta, sigma=sigma))


def random_design(
    m: int, R: int, mu0: float, delta: float, sigma: float = 1.0, min_gap: int = 10, seed: int = 0
) -> ShiftDesign:
    """Design with random shift locations at least ``min_gap`` apart (and from either end)."""
    if min_gap < 1:
        raise InvalidDesign("min_gap must be >= 1")
    slack = m - (R + 1) * min_gap
    if slack < 0:
        raise InvalidDesign(f"cannot place {R} shifts {min_gap} apart in m={m}")
    # stars and bars: spread the slack over R+1 gaps
    g = rng.stream(seed, rng.SIMULATION, m, R, min_gap)
    cuts = np.sort(g.integers(0, slack + 1, size=R))
    locations = tuple(int(c + (i + 1) * min_gap) for i, c in enumerate(cuts))
    return _validate(ShiftDesign(m=m, R=R, mu0=mu0, delta=delta, sigma=sigma, locations=locations))


def generate(d: ShiftDesign, seed: int, replication: int = 0) -> np.ndarray:
    """Draw one batch: independent N(regime mean, sigma^2) observations."""
    _validate(d)
    g = rng.stream(seed, rng.SIMULATION, replication)
    return d.mean_profile() + d.sigma * g.standard_normal(d.m)


def write_series(values, path, comments: Optional[list] = None) -> Path:
    lines = [f"# {c}" for c in comments or ()]
    lines += [format_float(v) for v in np.asarray(values, dtype=np.float64)]
    return atomic_write(path, "\n".join(lines) + "\n")


def read_series(path) -> np.ndarray:
    """One decimal per non-blank line; ``#`` starts a comment.

    Raises :class:`FormatError` naming the first offending line.
    """
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                v = float(line)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: not a number: {line!r}") from None
            if not np.isfinite(v):
                raise FormatError(f"{path}:{lineno}: value is not finite: {line!r}")
            values.append(v)
    return np.array(values, dtype=np.float64)
