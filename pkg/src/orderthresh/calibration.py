"""Null standardization constants for order and hard thresholding statistics.

For ``Y_i ~ chi2(1)`` the sum of the ``k`` largest of ``n`` values is
represented through exponential order statistics, ``Y_(i) = Htilde(V_(i))``
with ``Htilde = F^{-1}(1 - exp(-v))``.  Linearising around the expected
exponential order statistics ``nu_i`` gives the centering ``n * mu`` and the
variance ``n * sigma2`` used by every order threshold test in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from . import special
from .errors import DomainError

__all__ = [
    "CalibrationTable",
    "HardMoments",
    "LimitRatio",
    "nu_tilde",
    "h_tilde",
    "h_tilde_prime",
    "quantile_profile",
    "order_weights",
    "order_moments",
    "order_moments_all",
    "calibration_table",
    "exp_weights",
    "recommended_delta",
    "hard_moments",
    "HARD_METHODS",
    "truncated_chisq1_moments",
    "limit_ratio",
]


def _check_n(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    return int(n)


def _check_nk(n, k) -> tuple[int, int]:
    n = _check_n(n)
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= n:
        raise DomainError(f"k must be an integer in [1, {n}], got {k}")
    return n, int(k)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def nu_tilde(n: int) -> np.ndarray:
    """Expected exponential order statistics ``sum_{j<=i} 1/(n-j+1)``, i = 1..n."""
    n = _check_n(n)
    # Neumaier-compensated prefix sums: H~' amplifies rounding in small nu
    out = np.empty(n)
    s = c = 0.0
    for i, term in enumerate((1.0 / np.arange(n, 0, -1, dtype=float)).tolist()):
        t = s + term
        c += (s - t) + term if abs(s) >= abs(term) else (term - t) + s
        s = t
        out[i] = s + c
    return out


def h_tilde(v: float) -> float:
    """Chi-square(1) quantile at exponential quantile ``v``: F^{-1}(1 - e^{-v})."""
    v = float(v)
    if not v > 0.0:
        raise DomainError(f"v must be > 0, got {v}")
    return special.chisq1_quantile_from_survival(math.exp(-v))


def h_tilde_prime(v: float) -> float:
    """Derivative of :func:`h_tilde`, ``e^{-v} / f(h_tilde(v))``; tends to 2."""
    y = h_tilde(v)
    # e^{-v} / f(y) with f(y) = e^{-y/2} / sqrt(2 pi y), in log form
    return math.exp(-v + 0.5 * y + 0.5 * math.log(2.0 * math.pi * y))


@lru_cache(maxsize=64)
def quantile_profile(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(nu_tilde, Htilde(nu_tilde), Htilde'(nu_tilde))`` for sample size ``n``.

    Cached and read-only; every (n, k) calibration reuses it.
    """
    nu = nu_tilde(n)
    h = np.empty(n)
    hp = np.empty(n)
    for i, v in enumerate(nu):
        y = special.chisq1_quantile_from_survival(math.exp(-v))
        h[i] = y
        hp[i] = math.exp(-v + 0.5 * y + 0.5 * math.log(2.0 * math.pi * y))
    return _frozen(nu), _frozen(h), _frozen(hp)


def order_weights(n: int, k: int) -> np.ndarray:
    """Linearisation weights ``alpha_i(k)``, i = 1..n, from suffix sums in O(n)."""
    n, k = _check_nk(n, k)
    _, _, hp = quantile_profile(n)
    suffix = np.cumsum(hp[::-1])[::-1]  # suffix[i-1] = sum_{j>=i} hp_j
    head = suffix[n - k]
    numer = suffix.copy()
    numer[: n - k] = head
    return numer / np.arange(n, 0, -1, dtype=float)


def order_moments(n: int, k: int) -> tuple[float, float]:
    """``(mu, sigma2)``; the null statistic is ``(T - n mu) / (sqrt(n) sigma)``."""
    n, k = _check_nk(n, k)
    _, h, _ = quantile_profile(n)
    alpha = order_weights(n, k)
    mu = math.fsum(h[n - k:]) / n
    sigma2 = math.fsum(alpha * alpha) / n
    return mu, sigma2


@lru_cache(maxsize=64)
def order_moments_all(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``mu[k-1], sigma2[k-1]`` for every k = 1..n at once, O(n).

    With ``w_i = 1/(n-i+1)`` and suffix sums ``s_i`` of ``Htilde'``::

        n sigma2(k) = s_{n-k+1}^2 * sum_{i<=n-k} w_i^2 + sum_{i>n-k} (s_i w_i)^2
    """
    n = _check_n(n)
    _, h, hp = quantile_profile(n)
    w = 1.0 / np.arange(n, 0, -1, dtype=float)
    suffix = np.cumsum(hp[::-1])[::-1]
    ks = np.arange(1, n + 1)
    # prefix of w^2 over i <= n-k, and suffix of (s w)^2 over i > n-k
    w2_prefix = np.concatenate(([0.0], np.cumsum(w * w)))
    tail_sq = np.concatenate((np.cumsum(((suffix * w) ** 2)[::-1])[::-1], [0.0]))
    tail_h = np.concatenate((np.cumsum(h[::-1])[::-1], [0.0]))
    cut = n - ks
    sigma2 = (suffix[cut] ** 2 * w2_prefix[cut] + tail_sq[cut]) / n
    mu = tail_h[cut] / n
    return _frozen(mu), _frozen(sigma2)


@dataclass(frozen=True)
class CalibrationTable:
    n: int
    k: int
    nu_tilde: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    mu: float
    sigma2: float

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def standardize(self, statistic: float) -> float:
        return (statistic - self.n * self.mu) / (math.sqrt(self.n) * self.sigma)


@lru_cache(maxsize=256)
def calibration_table(n: int, k: int) -> CalibrationTable:
    n, k = _check_nk(n, k)
    nu, _, _ = quantile_profile(n)
    alpha = _frozen(order_weights(n, k))
    mu, sigma2 = order_moments(n, k)
    return CalibrationTable(n=n, k=k, nu_tilde=nu, alpha=alpha, mu=mu, sigma2=sigma2)


def exp_weights(n: int, k: int) -> np.ndarray:
    """Weights writing the top-k exponential sum as ``sum_j w_j V_j`` (V_j iid Exp(1))."""
    n, k = _check_nk(n, k)
    j = np.arange(1, n + 1, dtype=float)
    return np.where(j <= n - k, k / (n - j + 1.0), 1.0)


def recommended_delta(n: int, c: float = 1.0, d: float = 2.0) -> float:
    """Hard threshold ``2 log(n c (log n)^{-d})`` on the squared scale."""
    if n < 3:
        raise DomainError(f"n must be >= 3, got {n}")
    if not c > 0.0:
        raise DomainError(f"c must be > 0, got {c}")
    return 2.0 * math.log(n * c * math.log(n) ** (-d))


def truncated_chisq1_moments(delta: float) -> tuple[float, float]:
    """``E[Y 1{Y>delta}]`` and ``E[Y^2 1{Y>delta}]`` for Y ~ chi2(1)."""
    c = math.sqrt(delta)
    phi = special.std_normal_pdf(c)
    tail = special.std_normal_sf(c)
    m1 = 2.0 * (c * phi + tail)
    m2 = 2.0 * ((c ** 3 + 3.0 * c) * phi + 3.0 * tail)
    return m1, m2


@dataclass(frozen=True)
class HardMoments:
    delta: float
    mean_total: float
    var_total: float
    expected_count: float


HARD_METHODS = ("exact", "asymptotic")


def hard_moments(n: int, delta: float, method: str = "exact") -> HardMoments:
    """Null mean/variance of ``sum Y_i 1{Y_i > delta}`` and the expected count.

    ``method="exact"`` uses the truncated chi-square(1) moments.
    ``method="asymptotic"`` uses the Mills-ratio forms with
    ``A = n sqrt(2/pi) exp(-delta/2)``: mean ``A sqrt(delta) (1 + 1/delta)``
    and variance ``A delta^{3/2} (1 + 3/delta)``.  The asymptotic forms
    overstate both, which makes the test conservative for small ``delta``.
    The expected count is exact either way.
    """
    n = _check_n(n)
    delta = float(delta)
    if not delta > 0.0 or not math.isfinite(delta):
        raise DomainError(f"delta must be > 0, got {delta}")
    if method not in HARD_METHODS:
        raise DomainError(f"method must be one of {HARD_METHODS}, got {method!r}")
    count = 2.0 * n * special.std_normal_sf(math.sqrt(delta))
    if method == "asymptotic":
        scale = n * math.sqrt(2.0 / math.pi) * math.exp(-0.5 * delta)
        return HardMoments(
            delta=delta,
            mean_total=scale * math.sqrt(delta) * (1.0 + 1.0 / delta),
            var_total=scale * delta ** 1.5 * (1.0 + 3.0 / delta),
            expected_count=count,
        )
    m1, m2 = truncated_chisq1_moments(delta)
    return HardMoments(delta=delta, mean_total=n * m1, var_total=n * (m2 - m1 * m1),
                       expected_count=count)


@dataclass(frozen=True)
class LimitRatio:
    r: float
    mu_r: float
    sigma_r2: float

    @property
    def ratio(self) -> float:
        return self.mu_r / math.sqrt(self.sigma_r2)


def _chisq1_stop_loss(x: float) -> float:
    # E[(Y - x)^+] = E[Y; Y > x] - x P(Y > x)
    m1, _ = truncated_chisq1_moments(x)
    return m1 - x * 2.0 * special.std_normal_sf(math.sqrt(x))


def limit_ratio(r: float) -> LimitRatio:
    """Limits of ``mu`` and ``sigma2`` when ``k/n -> r``.

    With ``q = F^{-1}(1 - r)``, the mean limit is ``E[Y; Y > q]`` and the
    double integral of ``min(t,s) - ts`` against ``dF^{-1}`` over ``(1-r, 1]^2``
    becomes ``2 * int_q^inf F(x) E[(Y - x)^+] dx`` after substituting
    ``t = F(x)`` and using symmetry of the kernel.
    """
    r = float(r)
    if not 0.0 < r <= 1.0:
        raise DomainError(f"r must lie in (0, 1], got {r}")
    q = special.chisq1_quantile_from_survival(r)
    mu_r, _ = truncated_chisq1_moments(q)

    def integrand(x):
        if x <= 0.0:
            return 0.0
        return special.chisq_cdf(x, 1.0) * _chisq1_stop_loss(x)

    # split at a few points so the adaptive rule sees the sqrt cusp at 0 and the tail
    pieces = sorted({q, max(q, 1.0), max(q, 10.0), max(q, 60.0)})
    total = 0.0
    for lo, hi in zip(pieces, pieces[1:] + [math.inf]):
        if hi <= lo:
            continue
        val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)
        total += val
    return LimitRatio(r=r, mu_r=mu_r, sigma_r2=2.0 * total)
