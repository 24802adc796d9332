"""Global tests of ``H0: theta_i = 0 for all i`` from one sequence ``X_i ~ N(theta_i, 1)``.

The order threshold statistic sums the ``k`` largest ``Y_i = X_i^2``; the hard
threshold statistic sums the ``Y_i`` above a cutoff.  Simes and the omnibus
chi-square test are provided as competitors, along with the Storey-type
estimate of the number of nonzero means used to pick ``k`` from the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

from . import calibration, special
from .errors import DomainError

__all__ = [
    "StdNormal",
    "ScaledChiSq",
    "SimesMin",
    "TestOutcome",
    "ObservationVector",
    "top_k_sum",
    "order_threshold_test",
    "order_threshold_test_chisq",
    "chisq_moment_match",
    "hard_threshold_test",
    "chisq_test",
    "simes_test",
    "pvalues_from_normals",
    "storey_k_hat",
    "storey_k_hat_rows",
    "data_driven_k",
    "exp_order_threshold_test",
]


@dataclass(frozen=True)
class StdNormal:
    pass


@dataclass(frozen=True)
class ScaledChiSq:
    b: float
    nu: float


@dataclass(frozen=True)
class SimesMin:
    level: float


Reference = Union[StdNormal, ScaledChiSq, SimesMin]


@dataclass(frozen=True)
class TestOutcome:
    """Result of one global test.

    For Simes the ``p_value`` field holds the Simes statistic itself and the
    decision compares it with the (possibly enhanced) level in ``reference``.
    """

    __test__ = False  # not a pytest class

    statistic: float
    standardized: float
    reference: Reference
    p_value: float
    reject: bool
    alpha: float
    k_used: int | None = None

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "standardized": self.standardized,
            "p_value": self.p_value,
            "reject": self.reject,
            "k_used": self.k_used,
        }


class ObservationVector:
    """Observations ``X_i`` with their squares ``Y_i`` derived on first use."""

    def __init__(self, values):
        values = np.asarray(values, dtype=float).ravel()
        if values.size == 0:
            raise DomainError("need at least one observation")
        if not np.all(np.isfinite(values)):
            raise DomainError("observations must be finite")
        values.setflags(write=False)
        self.values = values

    def __len__(self) -> int:
        return self.values.size

    @cached_property
    def squared(self) -> np.ndarray:
        y = self.values * self.values
        y.setflags(write=False)
        return y


def _obs(x) -> ObservationVector:
    return x if isinstance(x, ObservationVector) else ObservationVector(x)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def _check_k(k, n: int) -> int:
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= n:
        raise DomainError(f"k must be an integer in [1, {n}], got {k}")
    return int(k)


def top_k_sum(y, k: int) -> float:
    """Sum of the ``k`` largest entries by partial selection.

    The sum is correctly rounded (``math.fsum``), so it does not depend on the
    order the selection leaves the entries in.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    k = _check_k(k, n)
    if k == n:
        return math.fsum(y)
    return math.fsum(np.partition(y, n - k)[n - k:])


def _normal_outcome(stat, z, alpha, k=None) -> TestOutcome:
    p = special.std_normal_sf(z)
    return TestOutcome(stat, z, StdNormal(), p, p < alpha, alpha, k)


def order_threshold_test(x, k: int, alpha: float = 0.05) -> TestOutcome:
    """Sum of the ``k`` largest squares, standardized to N(0, 1) under the null."""
    x = _obs(x)
    alpha = _check_alpha(alpha)
    k = _check_k(k, len(x))
    stat = top_k_sum(x.squared, k)
    z = calibration.calibration_table(len(x), k).standardize(stat)
    return _normal_outcome(stat, z, alpha, k)


def chisq_moment_match(n: int, k: int) -> tuple[float, float]:
    """``(b, nu)`` with ``b * chi2(nu)`` matching mean ``n mu`` and variance ``n sigma2``."""
    mu, sigma2 = calibration.order_moments(n, k)
    return sigma2 / (2.0 * mu), 2.0 * n * mu * mu / sigma2


def order_threshold_test_chisq(x, k: int, alpha: float = 0.05) -> TestOutcome:
    """Order threshold statistic referred to a scaled chi-square instead of N(0, 1)."""
    x = _obs(x)
    alpha = _check_alpha(alpha)
    n = len(x)
    k = _check_k(k, n)
    stat = top_k_sum(x.squared, k)
    table = calibration.calibration_table(n, k)
    b, nu = chisq_moment_match(n, k)
    p = special.chisq_sf(stat / b, nu)
    return TestOutcome(stat, table.standardize(stat), ScaledChiSq(b, nu), p, p < alpha, alpha, k)


def hard_threshold_test(x, delta: float, alpha: float = 0.05, method: str = "exact") -> TestOutcome:
    """Sum of squares above ``delta``, centred and scaled by :func:`calibration.hard_moments`."""
    x = _obs(x)
    alpha = _check_alpha(alpha)
    moments = calibration.hard_moments(len(x), delta, method)
    y = x.squared
    stat = math.fsum(y[y > moments.delta])
    z = (stat - moments.mean_total) / math.sqrt(moments.var_total)
    return _normal_outcome(stat, z, alpha)


def chisq_test(x, alpha: float = 0.05) -> TestOutcome:
    """Omnibus test: ``sum Y_i`` against its exact chi-square(n) null."""
    x = _obs(x)
    alpha = _check_alpha(alpha)
    n = len(x)
    stat = math.fsum(x.squared)
    p = special.chisq_sf(stat, n)
    return TestOutcome(stat, (stat - n) / math.sqrt(2.0 * n), ScaledChiSq(1.0, float(n)),
                       p, p < alpha, alpha, n)


def simes_test(pvalues, alpha: float = 0.05, k_opt: int | None = None) -> TestOutcome:
    """Simes global test, ``min_i n P_(i) / i < alpha / (1 - k_opt / n)``."""
    p = np.asarray(pvalues, dtype=float).ravel()
    alpha = _check_alpha(alpha)
    n = p.size
    if n == 0:
        raise DomainError("need at least one p-value")
    if np.any(~(p >= 0.0) | (p > 1.0)):
        raise DomainError("p-values must lie in [0, 1]")
    k_opt = 0 if k_opt is None else k_opt
    if not 0 <= k_opt < n:
        raise DomainError(f"k_opt must lie in [0, {n}), got {k_opt}")
    stat = float(np.min(n * np.sort(p) / np.arange(1, n + 1)))
    level = alpha / (1.0 - k_opt / n)
    return TestOutcome(stat, stat, SimesMin(level), stat, stat < level, alpha)


def pvalues_from_normals(x) -> np.ndarray:
    """Two-sided p-values ``2 (1 - Phi(|x_i|))``."""
    x = np.asarray(x, dtype=float)
    return np.minimum(2.0 * special.std_normal_sf_array(np.abs(x)), 1.0)


def storey_k_hat(pvalues, lam: float | None = None) -> int:
    """Estimated number of false nulls.

    ``max{(n G_n(lam) - n lam - 1) / (1 - lam), log(n)^{3/2}}`` with ``lam``
    the sample median by default, rounded to the nearest integer and clamped
    to ``[1, n]``.
    """
    p = np.asarray(pvalues, dtype=float).ravel()
    if p.size == 0:
        raise DomainError("need at least one p-value")
    if p.size < 2:
        raise DomainError("need at least two p-values")
    if lam is not None and not 0.0 <= lam <= 1.0:
        raise DomainError(f"lambda must lie in [0, 1], got {lam}")
    return int(storey_k_hat_rows(p[None, :], lam)[0])


def storey_k_hat_rows(p: np.ndarray, lam: float | None = None) -> np.ndarray:
    """Row-wise :func:`storey_k_hat` for a 2-D array of p-values (no validation)."""
    m, n = p.shape
    lam_rows = np.median(p, axis=1) if lam is None else np.full(m, float(lam))
    count = np.count_nonzero(p <= lam_rows[:, None], axis=1)
    bound = math.log(n) ** 1.5
    with np.errstate(divide="ignore", invalid="ignore"):
        est = (count - n * lam_rows - 1.0) / (1.0 - lam_rows)
    # lam == 1: numerator is -1 over a vanishing denominator, so the bound binds
    est = np.where(lam_rows >= 1.0, bound, np.maximum(est, bound))
    return np.clip(np.floor(est + 0.5), 1, n).astype(int)


def data_driven_k(x) -> int:
    return storey_k_hat(pvalues_from_normals(_obs(x).values))


def exp_order_threshold_test(v, k: int, alpha: float = 0.05) -> TestOutcome:
    """Top-k sum of exponential-scale data standardized by its exact weights."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        raise DomainError("need at least one observation")
    if not np.all(np.isfinite(v)) or np.any(v < 0.0):
        raise DomainError("exponential-scale data must be finite and >= 0")
    alpha = _check_alpha(alpha)
    n = v.size
    k = _check_k(k, n)
    w = calibration.exp_weights(n, k)
    stat = top_k_sum(v, k)
    z = (stat - math.fsum(w)) / math.sqrt(math.fsum(w * w))
    return _normal_outcome(stat, z, alpha, k)
