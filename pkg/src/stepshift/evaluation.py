"""Monte Carlo accuracy and precision studies of the detector.

Accuracy is the Monte Carlo mean (and its standard error) of each
estimated change point; precision is the coverage ``P(|est - true| <= k)``
for ``k = 0 .. 25``.  Both are computed over the replications that found
exactly ``R`` change points, matched to the true ones in sorted order.  As
a sensitivity check each report also carries a nearest-estimate version
that keeps every replication.
"""

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng
from .datagen import ShiftDesign, generate
from .detector import DetectorConfig
from .fileio import atomic_write

DEFAULT_REPLICATIONS = 1000
DEFAULT_SEED = 20140228
MAX_TOLERANCE = 25
PAPER_DELTAS = (0.5, 1.0, 2.0, 3.0, 4.0, 5.0)


def config_hash(config: DetectorConfig) -> str:
    return hashlib.sha256(config.describe().encode()).hexdigest()[:12]


@dataclass
class StudyRun:
    """Raw detections of one study: one tuple of change points per replication."""

    design: ShiftDesign
    replications: int
    seed: int
    config_text: str
    config_hash: str
    detections: list

    @property
    def counts(self) -> Counter:
        return Counter(len(d) for d in self.detections)

    def exact(self) -> np.ndarray:
        """(k, R) array of estimates from replications with exactly R detections."""
        R = self.design.R
        rows = [d for d in self.detections if len(d) == R]
        return np.array(rows, dtype=float).reshape(len(rows), R)

    def nearest(self) -> list:
        """Per true change point, the closest estimate of every replication that found any."""
        out = []
        for tau in self.design.boundaries:
            out.append(np.array([min(d, key=lambda e: (abs(e - tau), e)) for d in self.detections if d], dtype=float))
        return out


def run_study(design: ShiftDesign, replications: int, config: DetectorConfig, seed: int, threads: int = 1) -> StudyRun:
    """Generate and analyze ``replications`` batches; deterministic in the arguments."""
    if replications < 100:
        raise ValueError(f"need at least 100 replications, got {replications}")

    def work(start, stop):
        return [config.run(generate(design, seed, i)).change_points for i in range(start, stop)]

    detections = [d for part in rng.chunked(replications, work, threads) for d in part]
    return StudyRun(design, replications, seed, config.describe(), config_hash(config), detections)


@dataclass
class AccuracyReport:
    """Table-1 style summary.

    ``detection_rate`` is the fraction of replications that found exactly
    ``R`` change points; for an in-control design (``R = 0``) it is the
    false-alarm rate instead.
    """

    design: ShiftDesign
    replications: int
    seed: int
    true_change_points: tuple
    means: np.ndarray
    standard_errors: np.ndarray
    std_devs: np.ndarray
    n_matched: int
    detection_rate: float
    counts: dict
    nearest_means: np.ndarray = field(default_factory=lambda: np.empty(0))
    nearest_n: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    config_text: str = ""
    config_hash: str = ""


@dataclass
class PrecisionReport:
    """Table-2 style coverage ``P(|est - true| <= k)``, one column per change point."""

    design: ShiftDesign
    replications: int
    seed: int
    true_change_points: tuple
    tolerances: np.ndarray
    coverage: np.ndarray  # (len(tolerances), R)
    n_matched: int
    detection_rate: float
    counts: dict
    unconditional_coverage: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    config_text: str = ""
    config_hash: str = ""

    def at(self, k: int, r: int = 1) -> float:
        """Coverage within ``k`` of the ``r``-th (1-based) change point."""
        return float(self.coverage[k, r - 1])


def _rate(run: StudyRun) -> float:
    if run.design.R == 0:
        return sum(1 for d in run.detections if d) / run.replications
    return run.counts.get(run.design.R, 0) / run.replications


def accuracy_report(run: StudyRun) -> AccuracyReport:
    est = run.exact()
    k = est.shape[0]
    R = run.design.R
    if k > 0:
        means = est.mean(axis=0)
        sd = est.std(axis=0, ddof=1) if k > 1 else np.zeros(R)
    else:
        means = np.full(R, np.nan)
        sd = np.full(R, np.nan)
    near = run.nearest()
    return AccuracyReport(
        design=run.design,
        replications=run.replications,
        seed=run.seed,
        true_change_points=run.design.boundaries,
        means=means,
        standard_errors=sd / np.sqrt(max(k, 1)),
        std_devs=sd,
        n_matched=k,
        detection_rate=_rate(run),
        counts=dict(sorted(run.counts.items())),
        nearest_means=np.array([v.mean() if v.size else np.nan for v in near]),
        nearest_n=np.array([v.size for v in near], dtype=int),
        config_text=run.config_text,
        config_hash=run.config_hash,
    )


def precision_report(run: StudyRun, max_tolerance: int = MAX_TOLERANCE) -> PrecisionReport:
    ks = np.arange(max_tolerance + 1)
    est = run.exact()
    truth = np.array(run.design.boundaries, dtype=float)
    R = truth.size
    if est.shape[0] > 0:
        err = np.abs(est - truth)
        coverage = (err[None, :, :] <= ks[:, None, None]).mean(axis=1)
    else:
        coverage = np.full((ks.size, R), np.nan)
    near = run.nearest()
    uncond = np.empty((ks.size, R))
    for r, v in enumerate(near):
        hits = np.abs(v - truth[r])
        uncond[:, r] = (hits[None, :] <= ks[:, None]).sum(axis=1) / run.replications
    return PrecisionReport(
        design=run.design,
        replications=run.replications,
        seed=run.seed,
        true_change_points=run.design.boundaries,
        tolerances=ks,
        coverage=coverage,
        n_matched=est.shape[0],
        detection_rate=_rate(run),
        counts=dict(sorted(run.counts.items())),
        unconditional_coverage=uncond,
        config_text=run.config_text,
        config_hash=run.config_hash,
    )


def accuracy_study(
    design: ShiftDesign,
    replications: int = DEFAULT_REPLICATIONS,
    config: DetectorConfig = None,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
) -> AccuracyReport:
    config = config if config is not None else DetectorConfig()
    return accuracy_report(run_study(design, replications, config, seed, threads))


def precision_study(
    design: ShiftDesign,
    replications: int = DEFAULT_REPLICATIONS,
    config: DetectorConfig = None,
    seed: int = DEFAULT_SEED,
    threads: int = 1,
    max_tolerance: int = MAX_TOLERANCE,
) -> PrecisionReport:
    config = config if config is not None else DetectorConfig()
    return precision_report(run_study(design, replications, config, seed, threads), max_tolerance)


def _metadata(kind: str, report) -> list:
    counts = ",".join(f"{c}:{k}" for c, k in report.counts.items())
    return [
        f"# stepshift-{kind} v1",
        f"# design: {report.design.describe()}",
        f"# replications={report.replications} seed={report.seed} config_hash={report.config_hash}",
        f"# config: {report.config_text}",
        "# conditioning=exact-count matching=sorted",
        f"# detection_rate={report.detection_rate:.6g} matched={report.n_matched} counts={counts}",
    ]


def _fmt(v: float) -> str:
    return "nan" if not np.isfinite(v) else f"{v:.4f}"


def format_accuracy(report: AccuracyReport) -> str:
    lines = _metadata("accuracy", report)
    lines.append("tau\tmean\tse\tsd\tn\tnearest_mean\tnearest_n")
    for i, tau in enumerate(report.true_change_points):
        lines.append(
            f"{tau}\t{_fmt(report.means[i])}\t{_fmt(report.standard_errors[i])}\t{_fmt(report.std_devs[i])}\t"
            f"{report.n_matched}\t{_fmt(report.nearest_means[i])}\t{report.nearest_n[i]}"
        )
    return "\n".join(lines) + "\n"


def format_precision(report: PrecisionReport) -> str:
    lines = _metadata("precision", report)
    taus = report.true_change_points
    header = ["k"] + [f"tau{r}={t}" for r, t in enumerate(taus, start=1)]
    header += [f"all_tau{r}" for r in range(1, len(taus) + 1)]
    lines.append("\t".join(header))
    for i, k in enumerate(report.tolerances):
        row = [str(k)] + [_fmt(c) for c in report.coverage[i]] + [_fmt(c) for c in report.unconditional_coverage[i]]
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"


def write_report(report, path) -> Path:
    text = format_accuracy(report) if isinstance(report, AccuracyReport) else format_precision(report)
    return atomic_write(path, text)
