"""Retrospective detection of multiple step shifts in a Gaussian process mean.

A batch is scanned with a likelihood-ratio split statistic, normalized by
its simulated in-control expectation, and split recursively (binary
segmentation) while a calibrated threshold is exceeded.
"""

__version__ = "0.1.0"

from .calibration import (
    PAPER_ALPHAS,
    PAPER_THRESHOLDS,
    ThresholdStore,
    ThresholdTable,
    calibrate_threshold,
    default_paper_thresholds,
)
from .datagen import ShiftDesign, design, generate
from .detector import Detection, DetectorConfig, TestRecord, detect_single, segment
from .evaluation import accuracy_study, precision_study
from .kernels import BACKEND
from .normalization import NormalizationStore, NormalizationTable, estimate_table, normalize
from .stats import SegmentStats, SegmentTooShortError, SplitStatistics, segment_stats, split_scan

__all__ = [
    "BACKEND",
    "Detection",
    "DetectorConfig",
    "NormalizationStore",
    "NormalizationTable",
    "PAPER_ALPHAS",
    "PAPER_THRESHOLDS",
    "SegmentStats",
    "SegmentTooShortError",
    "ShiftDesign",
    "SplitStatistics",
    "TestRecord",
    "ThresholdStore",
    "ThresholdTable",
    "accuracy_study",
    "calibrate_threshold",
    "default_paper_thresholds",
    "design",
    "detect_single",
    "estimate_table",
    "generate",
    "normalize",
    "precision_study",
    "segment",
    "segment_stats",
    "split_scan",
]
