"""Order thresholding tests for sparse signals in long normal sequences and HANOVA layouts."""

from .calibration import (
    CalibrationTable,
    calibration_table,
    hard_moments,
    limit_ratio,
    order_moments,
    order_weights,
    recommended_delta,
)
from .errors import DegenerateDataError, DomainError, UnsupportedDesignError
from .hanova import GroupedData, HanovaOutcome, f_test, hanova_order_test, summarize
from .single import (
    ObservationVector,
    TestOutcome,
    chisq_test,
    hard_threshold_test,
    order_threshold_test,
    order_threshold_test_chisq,
    simes_test,
    storey_k_hat,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationTable",
    "calibration_table",
    "hard_moments",
    "limit_ratio",
    "order_moments",
    "order_weights",
    "recommended_delta",
    "DegenerateDataError",
    "DomainError",
    "UnsupportedDesignError",
    "GroupedData",
    "HanovaOutcome",
    "f_test",
    "hanova_order_test",
    "summarize",
    "ObservationVector",
    "TestOutcome",
    "chisq_test",
    "hard_threshold_test",
    "order_threshold_test",
    "order_threshold_test_chisq",
    "simes_test",
    "storey_k_hat",
]
