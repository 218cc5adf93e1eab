import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from stepshift.calibration import ThresholdStore  # noqa: E402
from stepshift.detector import DetectorConfig  # noqa: E402
from stepshift.normalization import NormalizationStore  # noqa: E402

_ACCEPTANCE = []


def record_criterion(label, passed, detail):
    _ACCEPTANCE.append((label, bool(passed), detail))


@pytest.fixture(scope="session")
def cache_dir(request):
    # pytest's own cache persists calibrations between runs
    return Path(request.config.cache.mkdir("stepshift"))


@pytest.fixture(scope="session")
def tables(cache_dir):
    return NormalizationStore(cache_dir=cache_dir)


@pytest.fixture(scope="session")
def thresholds(tables, cache_dir):
    return ThresholdStore(tables=tables, cache_dir=cache_dir)


@pytest.fixture(scope="session")
def detector(tables, thresholds):
    return DetectorConfig(tables=tables, thresholds=thresholds)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")
