"""Change detection on one segment and binary segmentation of a batch."""

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .calibration import ThresholdStore
from .normalization import NormalizationStore, normalize, normalize_with
from .stats import MIN_SCAN_LENGTH, SplitStatistics, as_series, split_scan

#: Shortest segment that is tested (each child keeps two admissible splits).
MIN_SEGMENT_LENGTH = 8
DEFAULT_BUDGET = 7
#: No depth cap: the test budget alone bounds the recursion.
DEFAULT_DEPTH = None


@dataclass(frozen=True)
class TestRecord:
    """Outcome of one split test.

    ``segment`` is the half-open global range ``[lo, hi)``; ``split_at`` is
    the 1-based index of the last observation before the change.
    """

    __test__ = False  # keep pytest from collecting this class

    test_index: int
    segment: tuple
    max_nlrt: float
    threshold_used: float
    signaled: bool
    split_at: Optional[int] = None
    too_short: bool = False
    argmax_m1: Optional[int] = None


@dataclass(frozen=True)
class Detection:
    change_points: tuple
    tests: tuple = ()

    @property
    def n_changes(self) -> int:
        return len(self.change_points)


def _profile(series, lo, hi, tables, root_e_lrt=None) -> SplitStatistics:
    split = split_scan(series, lo, hi)
    if root_e_lrt is not None:
        return normalize_with(split, root_e_lrt)
    return normalize(split, tables.get(hi - lo))


def detect_single(
    series,
    lo: int,
    hi: int,
    table,
    threshold: float,
    test_index: int = 1,
    min_length: int = MIN_SEGMENT_LENGTH,
) -> TestRecord:
    """Test ``series[lo:hi]`` for one change.

    ``table`` is a :class:`NormalizationTable` for length ``hi - lo`` (or
    a store providing one).  Signals when the largest normalized statistic
    exceeds ``threshold``; the split is placed at its first maximizer.
    """
    x = as_series(series)
    n = hi - lo
    if n < max(min_length, MIN_SCAN_LENGTH):
        return TestRecord(test_index, (lo, hi), 0.0, threshold, False, too_short=True)
    if isinstance(table, NormalizationStore):
        table = table.get(n)
    split = normalize(split_scan(x, lo, hi), table)
    return _record(split, threshold, test_index)


def _record(split: SplitStatistics, threshold: float, test_index: int) -> TestRecord:
    lo = split.segment_offset
    hi = lo + split.segment_length
    signaled = split.max_nlrt > threshold
    return TestRecord(
        test_index=test_index,
        segment=(lo, hi),
        max_nlrt=split.max_nlrt,
        threshold_used=threshold,
        signaled=bool(signaled),
        split_at=lo + split.argmax_m1 if signaled else None,
        argmax_m1=split.argmax_m1,
    )


def segment(
    series,
    tables: NormalizationStore,
    thresholds: ThresholdStore,
    budget: int = DEFAULT_BUDGET,
    max_depth: Optional[int] = DEFAULT_DEPTH,
    min_length: int = MIN_SEGMENT_LENGTH,
    reuse_root_table: bool = False,
) -> Detection:
    """Binary segmentation in breadth-first order.

    Tests are numbered 1, 2, ... in the order they run, and test ``t`` uses
    ``thresholds.threshold(segment length, t)``.  A segment is split only
    when its test signals.  Recursion stops after ``budget`` tests, below
    ``max_depth`` levels when one is given, and at segments shorter than
    ``min_length`` (which are skipped without using up a test).

    With ``reuse_root_table`` every test divides by the root segment's
    expectation profile (truncated to the child's splits) instead of a
    table estimated for the child's own length.
    """
    x = as_series(series)
    m = x.size
    if m < MIN_SCAN_LENGTH:
        raise ValueError(f"series needs at least {MIN_SCAN_LENGTH} observations, got {m}")
    if np.all(x == x[0]):
        return Detection(change_points=(), tests=())

    root_e_lrt = None
    if reuse_root_table and m >= min_length:
        root_e_lrt = tables.get(m).e_lrt

    records = []
    points = []
    queue = deque([(0, m, 1)])
    while queue and len(records) < budget:
        lo, hi, depth = queue.popleft()
        if hi - lo < max(min_length, MIN_SCAN_LENGTH):
            continue
        t = len(records) + 1
        split = _profile(x, lo, hi, tables, root_e_lrt)
        rec = _record(split, thresholds.threshold(hi - lo, t), t)
        records.append(rec)
        if not rec.signaled:
            continue
        points.append(rec.split_at)
        if max_depth is None or depth < max_depth:
            queue.append((lo, rec.split_at, depth + 1))
            queue.append((rec.split_at, hi, depth + 1))
    return Detection(change_points=tuple(sorted(points)), tests=tuple(records))


@dataclass
class DetectorConfig:
    """Everything :func:`segment` needs besides the data."""

    tables: NormalizationStore = field(default_factory=NormalizationStore)
    thresholds: Optional[ThresholdStore] = None
    budget: int = DEFAULT_BUDGET
    max_depth: Optional[int] = DEFAULT_DEPTH
    min_length: int = MIN_SEGMENT_LENGTH
    reuse_root_table: bool = False

    def __post_init__(self):
        if self.thresholds is None:
            self.thresholds = ThresholdStore(tables=self.tables)
        if self.budget < 1 or (self.max_depth is not None and self.max_depth < 1):
            raise ValueError("budget and max_depth must be >= 1")
        if self.min_length < MIN_SCAN_LENGTH:
            raise ValueError(f"min_length must be >= {MIN_SCAN_LENGTH}")

    def run(self, series) -> Detection:
        return segment(
            series,
            self.tables,
            self.thresholds,
            budget=self.budget,
            max_depth=self.max_depth,
            min_length=self.min_length,
            reuse_root_table=self.reuse_root_table,
        )

    def describe(self) -> str:
        th = self.thresholds
        return (
            f"thresholds={th.mode} alphas={','.join(map(str, th.alphas))} cal_reps={th.replications} "
            f"cal_seed={th.seed} table_reps={self.tables.replications} table_seed={self.tables.seed} "
            f"smoothed={int(self.tables.smooth)} budget={self.budget} max_depth={self.max_depth} "
            f"min_length={self.min_length} reuse_root_table={int(self.reuse_root_table)}"
        )
