"""In-control expectation of the split statistic, and normalization by it.

The raw statistic is larger on average for splits near the ends of a
segment than near its middle.  Dividing by its in-control expectation,
estimated by simulation for each segment length, flattens that profile so
a single threshold treats every split position alike.
"""

import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.optimize import isotonic_regression

from . import rng
from .fileio import FormatError, atomic_write, format_float, parse_metadata
from .stats import MIN_SCAN_LENGTH, SplitStatistics, first_argmax, null_profiles

logger = logging.getLogger(__name__)

HEADER = "stepshift-normtable v1"
DEFAULT_REPLICATIONS = 5000
DEFAULT_SEED = 20140226
#: Segments shorter than this get ten times the replications.
SHORT_SEGMENT = 8


@dataclass(frozen=True)
class NormalizationTable:
    """Estimated in-control mean of the split statistic for one segment length.

    ``e_lrt[i]`` is the expectation at ``m1 = i + 2``.
    """

    segment_length: int
    e_lrt: np.ndarray
    replications: int
    seed: int
    smoothed: bool = True

    def __post_init__(self):
        if self.e_lrt.shape != (self.segment_length - 3,):
            raise ValueError(
                f"table for n={self.segment_length} needs {self.segment_length - 3} entries, got {self.e_lrt.shape}"
            )
        if not np.all(self.e_lrt > 0):
            raise ValueError("in-control expectations must be positive")

    def at(self, m1: int) -> float:
        if not 2 <= m1 <= self.segment_length - 2:
            raise IndexError(f"m1={m1} outside [2, {self.segment_length - 2}]")
        return float(self.e_lrt[m1 - 2])

    def __eq__(self, other):
        if not isinstance(other, NormalizationTable):
            return NotImplemented
        return (
            self.segment_length == other.segment_length
            and self.replications == other.replications
            and self.seed == other.seed
            and self.smoothed == other.smoothed
            and np.array_equal(self.e_lrt, other.e_lrt)
        )

    __hash__ = None


def null_moments(n: int, replications: int, seed: int, threads: int = 1, purpose: int = rng.NORMALIZATION):
    """Mean and standard error of the split statistic per ``m1`` under i.i.d. N(0, 1)."""

    def work(start, stop):
        prof = null_profiles(rng.null_block(n, start, stop, seed, purpose))
        return prof.sum(axis=0), (prof * prof).sum(axis=0)

    parts = rng.chunked(replications, work, threads)
    total = np.zeros(n - 3)
    total_sq = np.zeros(n - 3)
    for s, sq in parts:
        total += s
        total_sq += sq
    mean = total / replications
    var = np.maximum(total_sq / replications - mean * mean, 0.0) * replications / (replications - 1)
    return mean, np.sqrt(var / replications)


def smooth_profile(e_lrt: np.ndarray) -> np.ndarray:
    """Isotonic fit: non-increasing up to the midpoint, non-decreasing after it."""
    k = e_lrt.size
    n = k + 3
    # m1 <= n // 2 belongs to the left half
    left = n // 2 - 1
    out = e_lrt.copy()
    if left > 0:
        out[:left] = isotonic_regression(e_lrt[:left], increasing=False).x
    if left < k:
        out[left:] = isotonic_regression(e_lrt[left:], increasing=True).x
    return out


def estimate_table(
    n: int,
    replications: int = DEFAULT_REPLICATIONS,
    seed: int = DEFAULT_SEED,
    smooth: bool = True,
    threads: int = 1,
) -> NormalizationTable:
    """Monte Carlo estimate of the in-control expectation for segment length ``n``.

    Deterministic in ``(n, replications, seed, smooth)``.  Lengths below
    eight use ten times the requested replications.
    """
    if n < MIN_SCAN_LENGTH:
        raise ValueError(f"segment length must be >= {MIN_SCAN_LENGTH}, got {n}")
    if replications < 100:
        raise ValueError(f"need at least 100 replications, got {replications}")
    reps = replications * 10 if n < SHORT_SEGMENT else replications
    mean, _ = null_moments(n, reps, seed, threads)
    if smooth and mean.size > 1:
        mean = smooth_profile(mean)
    return NormalizationTable(segment_length=n, e_lrt=mean, replications=reps, seed=seed, smoothed=smooth)


def normalize(split: SplitStatistics, table: NormalizationTable) -> SplitStatistics:
    """Divide each split statistic by its in-control expectation."""
    if table.segment_length != split.segment_length:
        raise ValueError(
            f"table is for segment length {table.segment_length}, split has length {split.segment_length}"
        )
    return normalize_with(split, table.e_lrt)


def normalize_with(split: SplitStatistics, e_lrt: np.ndarray) -> SplitStatistics:
    """Normalize by an explicit expectation profile (at least as long as the split's)."""
    k = split.lrt.size
    if e_lrt.size < k:
        raise ValueError(f"expectation profile has {e_lrt.size} entries, need {k}")
    nlrt = split.lrt / e_lrt[:k]
    i = first_argmax(nlrt)
    return replace(split, nlrt=nlrt, argmax_m1=i + 2, max_nlrt=float(nlrt[i]))


def write_table(table: NormalizationTable, path) -> Path:
    lines = [
        HEADER,
        f"n={table.segment_length} reps={table.replications} seed={table.seed} smoothed={int(table.smoothed)}",
    ]
    lines += [f"{m1}\t{format_float(v)}" for m1, v in enumerate(table.e_lrt, start=2)]
    return atomic_write(path, "\n".join(lines) + "\n")


def read_table(path) -> NormalizationTable:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise FormatError(f"{path}: missing '{HEADER}' header")
    try:
        meta = parse_metadata(lines[1])
        n = int(meta["n"])
        values = []
        for lineno, line in enumerate(lines[2:], start=3):
            m1, value = line.split("\t")
            if int(m1) != len(values) + 2:
                raise FormatError(f"{path}:{lineno}: expected m1={len(values) + 2}, got {m1}")
            values.append(float(value))
        return NormalizationTable(
            segment_length=n,
            e_lrt=np.array(values),
            replications=int(meta["reps"]),
            seed=int(meta["seed"]),
            smoothed=meta["smoothed"] == "1",
        )
    except (IndexError, KeyError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{path}: {exc}") from exc


def default_cache_dir() -> Path:
    """``$STEPSHIFT_CACHE``, else a per-user data directory."""
    env = os.environ.get("STEPSHIFT_CACHE")
    if env:
        return Path(env)
    base = os.environ.get("XDG_DATA_HOME") or Path.home() / ".local" / "share"
    return Path(base) / "stepshift"


class NormalizationStore:
    """Tables by segment length, memoized in memory and optionally on disk."""

    def __init__(
        self,
        replications: int = DEFAULT_REPLICATIONS,
        seed: int = DEFAULT_SEED,
        smooth: bool = True,
        cache_dir: Optional[os.PathLike] = None,
        threads: int = 1,
    ):
        self.replications = replications
        self.seed = seed
        self.smooth = smooth
        self.cache_dir = Path(cache_dir) if cache_dir is not None else None
        self.threads = threads
        self._tables: dict[int, NormalizationTable] = {}

    @property
    def key(self) -> str:
        return f"r{self.replications}-s{self.seed}-{'iso' if self.smooth else 'raw'}"

    def path_for(self, n: int) -> Optional[Path]:
        if self.cache_dir is None:
            return None
        return self.cache_dir / "normtables" / self.key / f"n{n}.tsv"

    def cached(self, n: int) -> bool:
        path = self.path_for(n)
        return n in self._tables or (path is not None and path.exists())

    def get(self, n: int) -> NormalizationTable:
        table = self._tables.get(n)
        if table is not None:
            return table
        path = self.path_for(n)
        if path is not None and path.exists():
            table = read_table(path)
        else:
            logger.info("estimating normalization table n=%d (%d replications)", n, self.replications)
            table = estimate_table(n, self.replications, self.seed, self.smooth, self.threads)
            if path is not None:
                write_table(table, path)
        self._tables[n] = table
        return table
