"""Naive Bayes classification for binary data, corrected for bias from
screening features by their correlation with the class."""

from .counts import BinaryDataset, CountsSummary, summarize
from .metrics import CalibrationTable, MetricsReport, calibration_table
from .model import (
    AlphaGrid,
    PredictiveDistribution,
    PriorConfig,
    SelectionCorrectedNB,
    build_alpha_grid,
    predict,
    predict_proba_from_grid,
)
from .numerics import QuadratureSpec
from .selection import CorrelationSelector, SelectionResult, select_by_threshold, select_top_k

__version__ = "0.1.0"
