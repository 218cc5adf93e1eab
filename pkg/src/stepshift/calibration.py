"""Simulated thresholds for the normalized split statistic.

A segment signals when the largest normalized statistic over all splits
exceeds a threshold.  The threshold for false-alarm probability ``alpha``
is an upper order statistic of that maximum over simulated in-control
segments.
"""

import logging
import math
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import rng
from .fileio import FormatError, atomic_write, format_float
from .normalization import NormalizationStore, NormalizationTable
from .stats import null_profiles

logger = logging.getLogger(__name__)

HEADER = "stepshift-thresholds v1"
DEFAULT_REPLICATIONS = 5000
DEFAULT_SEED = 20140227

PAPER_LENGTH = 200
PAPER_ALPHAS = (0.03, 0.02, 0.02, 0.01, 0.01, 0.01, 0.01)
PAPER_THRESHOLDS = (7.0089, 7.5745, 7.3684, 8.3876, 8.1206, 8.0292, 7.9153)


class QuantileWarning(UserWarning):
    """Too few simulated maxima beyond the requested quantile."""


class ThresholdNotFound(KeyError):
    """No threshold is recorded for the requested segment length and test."""


class CalibrationMissing(LookupError):
    """Strict mode: a threshold was needed for a length that was never calibrated."""


@dataclass
class ThresholdTable:
    """Thresholds keyed by ``(segment length, test index)``.

    Each entry is an ``(alpha, threshold)`` pair.  ``seed`` is ``None`` for
    thresholds that were not simulated here.
    """

    entries: dict = field(default_factory=dict)
    replications: int = DEFAULT_REPLICATIONS
    seed: Optional[int] = None

    def lookup(self, n: int, test_index: int) -> float:
        try:
            return self.entries[(n, test_index)][1]
        except KeyError:
            raise ThresholdNotFound(f"no threshold for n={n}, test {test_index}") from None

    def alpha(self, n: int, test_index: int) -> float:
        try:
            return self.entries[(n, test_index)][0]
        except KeyError:
            raise ThresholdNotFound(f"no threshold for n={n}, test {test_index}") from None


def default_paper_thresholds() -> ThresholdTable:
    """The seven published thresholds for batches of 200 observations."""
    entries = {
        (PAPER_LENGTH, t): (a, h) for t, (a, h) in enumerate(zip(PAPER_ALPHAS, PAPER_THRESHOLDS), start=1)
    }
    return ThresholdTable(entries=entries, replications=5000, seed=None)


def quantile_index(alpha: float, replications: int) -> int:
    """1-based order statistic used as the ``1 - alpha`` quantile (no interpolation)."""
    # round before ceil so 0.97 * 5000 lands on 4850, not 4851
    return max(1, min(replications, math.ceil(round((1.0 - alpha) * replications, 9))))


def quantile_threshold(maxima: np.ndarray, alpha: float) -> float:
    """Conservative empirical ``1 - alpha`` quantile of ``maxima``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    ordered = np.sort(maxima)
    return float(ordered[quantile_index(alpha, ordered.size) - 1])


def null_maxima(
    n: int,
    table: NormalizationTable,
    replications: int,
    seed: int,
    threads: int = 1,
    purpose: int = rng.CALIBRATION,
) -> np.ndarray:
    """Largest normalized split statistic of each simulated in-control segment."""
    if table.segment_length != n:
        raise ValueError(f"table is for length {table.segment_length}, not {n}")

    def work(start, stop):
        prof = null_profiles(rng.null_block(n, start, stop, seed, purpose))
        return (prof / table.e_lrt).max(axis=1)

    return np.concatenate(rng.chunked(replications, work, threads))


def _check_reliability(alpha: float, replications: int) -> None:
    if replications < 1:
        raise ValueError("need at least one replication")
    if alpha * replications < 10:
        warnings.warn(
            f"alpha*replications = {alpha * replications:g} < 10: the {1 - alpha:g} quantile is unreliable",
            QuantileWarning,
            stacklevel=3,
        )
    elif replications < 1000:
        warnings.warn(f"only {replications} replications; use at least 1000", QuantileWarning, stacklevel=3)


def calibrate_thresholds(
    n: int,
    alphas: Sequence[float],
    table: NormalizationTable,
    replications: int = DEFAULT_REPLICATIONS,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> dict:
    """Thresholds for several alphas from one shared set of simulated maxima."""
    for a in alphas:
        if not 0.0 < a < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {a}")
        _check_reliability(a, replications)
    maxima = null_maxima(n, table, replications, seed, threads)
    return {a: quantile_threshold(maxima, a) for a in alphas}


def calibrate_threshold(
    n: int,
    alpha: float,
    table: NormalizationTable,
    replications: int = DEFAULT_REPLICATIONS,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> float:
    """Threshold giving false-alarm probability ``alpha`` for segments of length ``n``.

    Warns with :class:`QuantileWarning` when ``alpha * replications < 10``.
    """
    return calibrate_thresholds(n, [alpha], table, replications, seed, threads)[alpha]


def null_signal_rate(
    n: int,
    threshold: float,
    table: NormalizationTable,
    replications: int,
    seed: int,
    threads: int = 1,
) -> float:
    """Fraction of fresh in-control segments whose maximum exceeds ``threshold``."""
    maxima = null_maxima(n, table, replications, seed, threads, purpose=rng.VERIFICATION)
    return float(np.mean(maxima > threshold))


def write_thresholds(table: ThresholdTable, path) -> Path:
    seed = "na" if table.seed is None else str(table.seed)
    lines = [HEADER]
    for (n, t), (alpha, h) in sorted(table.entries.items()):
        lines.append(f"{n}\t{t}\t{format_float(alpha)}\t{format_float(h)}\t{table.replications}\t{seed}")
    return atomic_write(path, "\n".join(lines) + "\n")


def read_thresholds(path) -> ThresholdTable:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise FormatError(f"{path}: missing '{HEADER}' header")
    entries = {}
    reps, seed = DEFAULT_REPLICATIONS, None
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 6:
            raise FormatError(f"{path}:{lineno}: expected 6 tab-separated fields, got {len(parts)}")
        try:
            n, t = int(parts[0]), int(parts[1])
            entries[(n, t)] = (float(parts[2]), float(parts[3]))
            reps = int(parts[4])
            seed = None if parts[5] == "na" else int(parts[5])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
    return ThresholdTable(entries=entries, replications=reps, seed=seed)


class ThresholdStore:
    """Thresholds per ``(segment length, test index)`` for the detector.

    ``mode="paper"`` returns the published value for the test index at any
    length.  ``mode="calibrated"`` uses thresholds simulated for the exact
    segment length; a missing length is simulated when ``on_demand`` is
    set, refused in ``strict`` mode, and otherwise replaced by the
    published value with a logged warning.
    """

    def __init__(
        self,
        mode: str = "calibrated",
        tables: Optional[NormalizationStore] = None,
        alphas: Sequence[float] = PAPER_ALPHAS,
        replications: int = DEFAULT_REPLICATIONS,
        seed: int = DEFAULT_SEED,
        cache_dir: Optional[os.PathLike] = None,
        on_demand: bool = True,
        strict: bool = False,
        threads: int = 1,
    ):
        if mode not in ("paper", "calibrated"):
            raise ValueError(f"unknown threshold mode {mode!r}")
        self.mode = mode
        self.tables = tables if tables is not None else NormalizationStore(cache_dir=cache_dir, threads=threads)
        self.alphas = tuple(alphas)
        self.replications = replications
        self.seed = seed
        self.cache_dir = Path(cache_dir) if cache_dir is not None else None
        self.on_demand = on_demand
        self.strict = strict
        self.threads = threads
        self._by_alpha: dict = {}
        self._loaded = False

    @property
    def key(self) -> str:
        return f"r{self.replications}-s{self.seed}-{self.tables.key}"

    @property
    def path(self) -> Optional[Path]:
        if self.cache_dir is None:
            return None
        return self.cache_dir / "thresholds" / f"{self.key}.tsv"

    def alpha_for(self, test_index: int) -> float:
        if not 1 <= test_index <= len(self.alphas):
            raise ThresholdNotFound(f"test index {test_index} outside 1..{len(self.alphas)}")
        return self.alphas[test_index - 1]

    def _load(self) -> None:
        if self._loaded:
            return
        self._loaded = True
        path = self.path
        if path is not None and path.exists():
            for (n, _), (alpha, h) in read_thresholds(path).entries.items():
                self._by_alpha.setdefault((n, alpha), h)

    def _persist(self) -> None:
        if self.path is not None:
            write_thresholds(self.table(), self.path)

    def has(self, n: int) -> bool:
        self._load()
        return all((n, a) in self._by_alpha for a in self.alphas)

    def calibrate(self, n: int) -> dict:
        """Simulate (or load) thresholds for every alpha at segment length ``n``."""
        self._load()
        missing = [a for a in dict.fromkeys(self.alphas) if (n, a) not in self._by_alpha]
        if missing:
            logger.info("calibrating thresholds n=%d alphas=%s (%d replications)", n, missing, self.replications)
            found = calibrate_thresholds(n, missing, self.tables.get(n), self.replications, self.seed, self.threads)
            for a, h in found.items():
                self._by_alpha[(n, a)] = h
            self._persist()
        return {a: self._by_alpha[(n, a)] for a in self.alphas}

    def threshold(self, n: int, test_index: int) -> float:
        alpha = self.alpha_for(test_index)
        if self.mode == "paper":
            if test_index > len(PAPER_THRESHOLDS):
                raise ThresholdNotFound(f"no published threshold for test {test_index}")
            return PAPER_THRESHOLDS[test_index - 1]
        self._load()
        if (n, alpha) not in self._by_alpha:
            if self.strict:
                raise CalibrationMissing(f"no calibrated threshold for n={n}, alpha={alpha}; run calibration first")
            if self.on_demand:
                self.calibrate(n)
            else:
                logger.warning("no calibrated threshold for n=%d; using published value for test %d", n, test_index)
                return PAPER_THRESHOLDS[test_index - 1]
        return self._by_alpha[(n, alpha)]

    def table(self) -> ThresholdTable:
        """Everything calibrated so far as a :class:`ThresholdTable`."""
        self._load()
        entries = {}
        for (n, alpha), h in self._by_alpha.items():
            for t, a in enumerate(self.alphas, start=1):
                if a == alpha:
                    entries[(n, t)] = (alpha, h)
        return ThresholdTable(entries=entries, replications=self.replications, seed=self.seed)
