"""Command-line front end.

Exit codes: 0 = no change detected (or success), 1 = change(s) detected by
``analyze``, 2 = usage or data error.
"""

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import (
    PAPER_ALPHAS,
    CalibrationMissing,
    ThresholdStore,
)
from .calibration import DEFAULT_REPLICATIONS as CAL_REPS
from .calibration import DEFAULT_SEED as CAL_SEED
from .datagen import InvalidDesign, design, generate, random_design, read_series, write_series
from .detector import MIN_SEGMENT_LENGTH, DetectorConfig
from .evaluation import DEFAULT_REPLICATIONS as STUDY_REPS
from .evaluation import DEFAULT_SEED as STUDY_SEED
from .evaluation import accuracy_study, format_accuracy, format_precision, precision_study
from .fileio import FormatError, atomic_write, format_float
from .normalization import DEFAULT_REPLICATIONS as TABLE_REPS
from .normalization import DEFAULT_SEED as TABLE_SEED
from .normalization import NormalizationStore, default_cache_dir, normalize
from .stats import MIN_SCAN_LENGTH, split_scan

EXIT_OK = 0
EXIT_CHANGE = 1
EXIT_ERROR = 2

logger = logging.getLogger("stepshift")


class UsageError(Exception):
    pass


def _alphas(text: str) -> tuple:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not values or any(not 0 < a < 1 for a in values):
        raise argparse.ArgumentTypeError("every alpha must lie in (0, 1)")
    return values


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _add_detector_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("detector")
    g.add_argument("--thresholds", choices=("calibrated", "paper"), default="calibrated",
                   help="per-length simulated thresholds, or the published n=200 values")
    g.add_argument("--alpha", type=_alphas, default=PAPER_ALPHAS,
                   help="false-alarm probability per test, in test order (default: %(default)s)")
    g.add_argument("--strict", action="store_true", help="refuse uncalibrated segment lengths")
    g.add_argument("--no-calibrate", action="store_true",
                   help="do not simulate missing thresholds; fall back to published values")
    g.add_argument("--paper-replication", action="store_true",
                   help="published thresholds, unsmoothed tables, root table reused by child tests")
    g.add_argument("--reuse-root-table", action="store_true")
    g.add_argument("--raw-tables", action="store_true", help="skip isotonic smoothing of expectation tables")
    g.add_argument("--budget", type=_positive_int, default=7)
    g.add_argument("--max-depth", type=_positive_int, default=None)
    g.add_argument("--min-length", type=int, default=MIN_SEGMENT_LENGTH)
    g.add_argument("--table-reps", type=_positive_int, default=TABLE_REPS)
    g.add_argument("--table-seed", type=int, default=TABLE_SEED)
    g.add_argument("--cal-reps", type=_positive_int, default=CAL_REPS)
    g.add_argument("--cal-seed", type=int, default=CAL_SEED)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cache-dir", type=Path, default=None, help="default: $STEPSHIFT_CACHE or a per-user directory")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")


def _add_design(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, default=200)
    p.add_argument("--R", type=int, default=0)
    p.add_argument("--mu0", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1.0)


def _cache_dir(args) -> Path:
    path = args.cache_dir if args.cache_dir is not None else default_cache_dir()
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise UsageError(f"cache directory {path} is not writable: {exc}") from None
    return path


def _detector(args) -> DetectorConfig:
    cache = _cache_dir(args)
    paper = args.paper_replication
    tables = NormalizationStore(
        replications=args.table_reps,
        seed=args.table_seed,
        smooth=not (args.raw_tables or paper),
        cache_dir=cache,
        threads=args.threads,
    )
    thresholds = ThresholdStore(
        mode="paper" if paper else args.thresholds,
        tables=tables,
        alphas=args.alpha,
        replications=args.cal_reps,
        seed=args.cal_seed,
        cache_dir=cache,
        on_demand=not (args.no_calibrate or args.strict),
        strict=args.strict,
        threads=args.threads,
    )
    if args.min_length < MIN_SCAN_LENGTH:
        raise UsageError(f"--min-length must be >= {MIN_SCAN_LENGTH}")
    return DetectorConfig(
        tables=tables,
        thresholds=thresholds,
        budget=args.budget,
        max_depth=args.max_depth,
        min_length=args.min_length,
        reuse_root_table=args.reuse_root_table or paper,
    )


def _load_input(path: Path) -> np.ndarray:
    try:
        x = read_series(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except FormatError as exc:
        raise UsageError(str(exc)) from None
    if x.size < MIN_SCAN_LENGTH:
        raise UsageError(f"{path}: need at least {MIN_SCAN_LENGTH} observations, found {x.size}")
    return x


def _chart_text(x: np.ndarray, config: DetectorConfig, source: str) -> str:
    n = x.size
    threshold = config.thresholds.threshold(n, 1) if n >= config.min_length else float("nan")
    split = normalize(split_scan(x), config.tables.get(n))
    lines = [
        "# stepshift-chart v1",
        f"# source={source} n={n} threshold={format_float(threshold)}",
        f"# config: {config.describe()}",
        "m1\tlrt\tnlrt\tthreshold",
    ]
    for m1, a, b in zip(split.m1, split.lrt, split.nlrt):
        lines.append(f"{m1}\t{format_float(a)}\t{format_float(b)}\t{format_float(threshold)}")
    return "\n".join(lines) + "\n"


def cmd_analyze(args) -> int:
    x = _load_input(args.input)
    config = _detector(args)
    det = config.run(x)
    out = sys.stdout
    print(f"# {args.input}: n={x.size}", file=out)
    for rec in det.tests:
        lo, hi = rec.segment
        verdict = f"signal, split after {rec.split_at}" if rec.signaled else "no signal"
        print(
            f"test {rec.test_index}: segment {lo + 1}..{hi} max_nlrt={rec.max_nlrt:.4f} "
            f"threshold={rec.threshold_used:.4f} {verdict}",
            file=out,
        )
    if det.change_points:
        print("change points: " + " ".join(map(str, det.change_points)), file=out)
    else:
        print("change points: none", file=out)
    if args.chart is not None:
        atomic_write(args.chart, _chart_text(x, config, str(args.input)))
    return EXIT_CHANGE if det.change_points else EXIT_OK


def cmd_chart(args) -> int:
    x = _load_input(args.input)
    text = _chart_text(x, _detector(args), str(args.input))
    if args.output is None:
        sys.stdout.write(text)
    else:
        atomic_write(args.output, text)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cache = _cache_dir(args)
    tables = NormalizationStore(
        replications=args.table_reps, seed=args.table_seed, smooth=not args.raw_tables,
        cache_dir=cache, threads=args.threads,
    )
    store = ThresholdStore(
        mode="calibrated", tables=tables, alphas=args.alpha, replications=args.cal_reps,
        seed=args.cal_seed, cache_dir=cache, threads=args.threads,
    )
    for n in args.n:
        if n < MIN_SCAN_LENGTH:
            raise UsageError(f"segment length must be >= {MIN_SCAN_LENGTH}, got {n}")
        hit = store.has(n) and tables.cached(n)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            found = store.calibrate(n)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        print(f"n={n} {'cache hit' if hit else 'calibrated'}")
        for t, a in enumerate(store.alphas, start=1):
            print(f"  test {t}: alpha={a:g} threshold={found[a]:.4f}")
    print(f"normalization tables: {tables.path_for(args.n[0]).parent}")
    print(f"thresholds: {store.path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        if args.random_locations:
            d = random_design(args.m, args.R, args.mu0, args.delta, args.sigma, args.min_gap, args.seed)
        else:
            d = design(args.m, args.R, args.mu0, args.delta, args.sigma)
    except InvalidDesign as exc:
        raise UsageError(str(exc)) from None
    x = generate(d, args.seed, args.replication)
    comments = ["stepshift-series v1", f"design: {d.describe()}", f"seed={args.seed} replication={args.replication}"]
    if args.output is None:
        for c in comments:
            print(f"# {c}")
        for v in x:
            print(repr(float(v)))
    else:
        write_series(x, args.output, comments)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    try:
        d = design(args.m, args.R, args.mu0, args.delta, args.sigma)
    except InvalidDesign as exc:
        raise UsageError(str(exc)) from None
    if args.reps < 100:
        raise UsageError("--reps must be >= 100")
    config = _detector(args)
    if args.study == "accuracy":
        text = format_accuracy(accuracy_study(d, args.reps, config, args.seed, args.threads))
    else:
        text = format_precision(precision_study(d, args.reps, config, args.seed, args.threads))
    if args.output is None:
        sys.stdout.write(text)
    else:
        atomic_write(args.output, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stepshift", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="detect step shifts in a batch (one value per line)")
    p.add_argument("input", type=Path)
    p.add_argument("--chart", type=Path, default=None, help="also write root-segment chart data here")
    _add_detector_options(p)
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("chart", help="write (m1, lrt, nlrt, threshold) rows for a batch")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, default=None)
    _add_detector_options(p)
    _add_common(p)
    p.set_defaults(func=cmd_chart)

    p = sub.add_parser("calibrate", help="simulate normalization tables and thresholds")
    p.add_argument("--n", type=int, nargs="+", default=[200], help="segment lengths")
    p.add_argument("--reps", dest="cal_reps", type=_positive_int, default=CAL_REPS)
    p.add_argument("--seed", dest="cal_seed", type=int, default=CAL_SEED)
    p.add_argument("--alpha", type=_alphas, default=PAPER_ALPHAS)
    p.add_argument("--table-reps", type=_positive_int, default=TABLE_REPS)
    p.add_argument("--table-seed", type=int, default=TABLE_SEED)
    p.add_argument("--raw-tables", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("simulate", help="generate a batch with uniformly spaced alternating shifts")
    _add_design(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replication", type=int, default=0)
    p.add_argument("--random-locations", action="store_true")
    p.add_argument("--min-gap", type=int, default=10)
    p.add_argument("-o", "--output", type=Path, default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evaluate", help="Monte Carlo accuracy or precision study")
    p.add_argument("study", choices=("accuracy", "precision"))
    _add_design(p)
    p.add_argument("--reps", type=int, default=STUDY_REPS)
    p.add_argument("--seed", type=int, default=STUDY_SEED)
    p.add_argument("-o", "--output", type=Path, default=None)
    _add_detector_options(p)
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, CalibrationMissing, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
