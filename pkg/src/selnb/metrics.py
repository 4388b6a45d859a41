"""Error rates, log loss, Brier score and decile calibration tables."""

from __future__ import annotations

import io
import math
from dataclasses import asdict, dataclass

import numpy as np

from ._validation import check_binary_labels, check_probabilities, check_same_length

LOG_CLAMP = 1e-15


def _pair(predictions, labels):
    p = check_probabilities(predictions)
    y = check_binary_labels(labels)
    check_same_length(p, y)
    return p, y


def error_rate(predictions, labels) -> float:
    """Fraction misclassified when ``p1 >= 0.5`` predicts class 1."""
    p, y = _pair(predictions, labels)
    return float(np.mean((p >= 0.5).astype(int) != y))


def expected_error_rate(predictions) -> float:
    """Error rate implied by the model's own probabilities."""
    p = check_probabilities(predictions)
    return float(np.mean(np.where(p < 0.5, p, 1.0 - p)))


def mean_neg_log_prob(predictions, labels) -> float:
    p, y = _pair(predictions, labels)
    p = np.clip(p, LOG_CLAMP, 1.0 - LOG_CLAMP)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log1p(-p)))


def mean_squared_error(predictions, labels) -> float:
    """Brier score."""
    p, y = _pair(predictions, labels)
    return float(np.mean((y - p) ** 2))


@dataclass(frozen=True)
class MetricsReport:
    error_rate: float
    expected_error_rate: float
    mean_neg_log_prob: float
    mean_squared_error: float

    @classmethod
    def compute(cls, predictions, labels) -> "MetricsReport":
        return cls(error_rate(predictions, labels), expected_error_rate(predictions),
                   mean_neg_log_prob(predictions, labels),
                   mean_squared_error(predictions, labels))

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class CalibrationRow:
    lower: float
    upper: float
    count: int
    pred: float | None
    actual: float | None


@dataclass(frozen=True)
class CalibrationTable:
    rows: tuple

    @property
    def counts(self):
        return np.array([r.count for r in self.rows])

    def to_dicts(self):
        return [asdict(r) for r in self.rows]

    def to_delimited(self, sep="\t") -> str:
        """Render with the columns Category, #, Pred, Actual; empty bins show ``--``."""
        buf = io.StringIO()
        buf.write(sep.join(["Category", "#", "Pred", "Actual"]) + "\n")
        for r in self.rows:
            pred = "--" if r.pred is None else f"{r.pred:.3f}"
            actual = "--" if r.actual is None else f"{r.actual:.3f}"
            buf.write(sep.join([f"{r.lower:.1f} - {r.upper:.1f}", str(r.count), pred, actual]) + "\n")
        return buf.getvalue()


def _mean_within(v):
    # keeps the mean inside [min, max] despite rounding in the sum
    return float(min(max(math.fsum(v) / v.size, v.min()), v.max()))


def calibration_table(predictions, labels, bins: int = 10) -> CalibrationTable:
    """Group cases by the first decimal of ``p1``; the top bin includes 1.0."""
    p, y = _pair(predictions, labels)
    idx = np.minimum(np.floor(p * bins).astype(int), bins - 1)
    rows = []
    for b in range(bins):
        mask = idx == b
        c = int(mask.sum())
        rows.append(CalibrationRow(
            lower=b / bins, upper=(b + 1) / bins, count=c,
            pred=_mean_within(p[mask]) if c else None,
            actual=float(y[mask].mean()) if c else None,
        ))
    return CalibrationTable(tuple(rows))
