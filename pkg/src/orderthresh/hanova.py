"""Order thresholding for the balanced one-way layout with many groups.

``(a - 1) F`` is the sum of the squared studentized effects
``Z~_i = sqrt(n) (Xbar_i - Xbar) / sqrt(MSE)``.  Keeping only the ``k``
largest squares gives the order threshold statistic; estimating the error
variance inflates its null variance to ``1 + 2 mu^2 / (sigma^2 (n - 1))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import calibration, special
from .errors import DegenerateDataError, DomainError, UnsupportedDesignError
from .single import pvalues_from_normals, storey_k_hat, top_k_sum

__all__ = [
    "GroupedData",
    "HanovaOutcome",
    "summarize",
    "studentized_effects",
    "null_variance",
    "VARIANCE_METHODS",
    "hanova_order_test",
    "f_test",
    "hanova_pvalues",
    "hanova_storey_k",
]


@dataclass(frozen=True)
class GroupedData:
    a: int
    n: int
    values: np.ndarray = field(repr=False)
    group_means: np.ndarray = field(repr=False)
    grand_mean: float
    mse: float
    mst: float
    f_stat: float

    @property
    def df_error(self) -> int:
        return self.a * (self.n - 1)


@dataclass(frozen=True)
class HanovaOutcome:
    statistic: float
    standardized: float
    null_variance: float
    p_value: float
    reject: bool
    k_used: int
    alpha: float
    f_stat: float

    def to_dict(self) -> dict:
        return {
            "f_stat": self.f_stat,
            "statistic": self.statistic,
            "standardized": self.standardized,
            "null_variance": self.null_variance,
            "p_value": self.p_value,
            "reject": self.reject,
            "k_used": self.k_used,
        }


def summarize(matrix) -> GroupedData:
    """Group means, grand mean, MSE, MST and F for an ``a x n`` layout (one row per group)."""
    if not isinstance(matrix, np.ndarray):
        rows = [list(r) if np.ndim(r) == 1 else r for r in matrix]
        if all(isinstance(r, list) for r in rows) and len({len(r) for r in rows}) > 1:
            raise UnsupportedDesignError("groups must all have the same size")
        matrix = rows
    values = np.array(matrix, dtype=float)
    if values.ndim != 2:
        raise DomainError("expected a 2-D layout with one row per group")
    a, n = values.shape
    if a < 2 or n < 2:
        raise DomainError(f"need at least 2 groups of size 2, got {a} x {n}")
    if not np.all(np.isfinite(values)):
        raise DomainError("values must be finite")
    means = values.mean(axis=1)
    grand = float(means.mean())
    sse = float(np.sum((values - means[:, None]) ** 2))
    mse = sse / (a * (n - 1))
    if not mse > 0.0:
        raise DegenerateDataError("within-group variance is zero")
    mst = n * float(np.sum((means - grand) ** 2)) / (a - 1)
    values.setflags(write=False)
    means.setflags(write=False)
    return GroupedData(a=a, n=n, values=values, group_means=means, grand_mean=grand,
                       mse=mse, mst=mst, f_stat=mst / mse)


def studentized_effects(g: GroupedData) -> np.ndarray:
    return math.sqrt(g.n) * (g.group_means - g.grand_mean) / math.sqrt(g.mse)


VARIANCE_METHODS = ("plugin", "r1")


def null_variance(a: int, k: int, n: int, method: str = "plugin") -> float:
    """Null variance of the standardized statistic, ``1 + 2 mu^2 / (sigma2 (n - 1))``.

    ``"plugin"`` evaluates ``mu`` and ``sigma2`` at the finite ``(a, k)``.
    ``"r1"`` uses the all-groups limit ``mu^2 / sigma2 = 1/2`` for every ``k``,
    giving ``1 + 1 / (n - 1)``; it is larger for small ``k`` and so more
    conservative there.
    """
    if method not in VARIANCE_METHODS:
        raise DomainError(f"method must be one of {VARIANCE_METHODS}, got {method!r}")
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if method == "r1":
        calibration.order_moments(a, k)  # validates (a, k)
        return 1.0 + 1.0 / (n - 1)
    mu, sigma2 = calibration.order_moments(a, k)
    return 1.0 + 2.0 * mu * mu / (sigma2 * (n - 1))


def hanova_order_test(g: GroupedData, k: int, alpha: float = 0.05,
                      variance: str = "plugin") -> HanovaOutcome:
    """Top-k sum of squared studentized effects, referred to ``N(0, null_variance)``."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= g.a:
        raise DomainError(f"k must be an integer in [1, {g.a}], got {k}")
    k = int(k)
    z = studentized_effects(g)
    stat = top_k_sum(z * z, k)
    table = calibration.calibration_table(g.a, k)
    standardized = table.standardize(stat)
    var = null_variance(g.a, k, g.n, variance)
    p = special.std_normal_sf(standardized / math.sqrt(var))
    return HanovaOutcome(stat, standardized, var, p, p < alpha, k, alpha, g.f_stat)


def f_test(g: GroupedData, alpha: float = 0.05) -> HanovaOutcome:
    """Classical F test in the same result shape (``standardized`` is F itself)."""
    p = special.f_sf(g.f_stat, g.a - 1, g.df_error)
    return HanovaOutcome((g.a - 1) * g.f_stat, g.f_stat, 1.0, p, p < alpha, g.a, alpha, g.f_stat)


def hanova_pvalues(g: GroupedData) -> np.ndarray:
    """``2 (1 - Phi(|Z_i|))`` with ``Z_i = (Xbar_i - Xbar) / sqrt(MSE / n)``."""
    return pvalues_from_normals(studentized_effects(g))


def hanova_storey_k(g: GroupedData) -> int:
    return storey_k_hat(hanova_pvalues(g))
