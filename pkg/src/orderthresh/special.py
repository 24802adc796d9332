"""Normal, chi-square, noncentral chi-square(1) and F distribution functions.

Everything here is scalar, pure and written against the standard library
``math`` module only (``erfc`` and ``lgamma``); the incomplete gamma and beta
functions, the quantile solvers and the noncentral series are implemented
directly.  Tail probabilities are carried in log-space so that quantiles at
survival probabilities far below machine epsilon stay accurate.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = [
    "std_normal_cdf",
    "std_normal_sf",
    "std_normal_pdf",
    "std_normal_quantile",
    "std_normal_isf",
    "std_normal_sf_array",
    "regularized_gamma_p",
    "regularized_gamma_q",
    "chisq_cdf",
    "chisq_sf",
    "chisq_logsf",
    "chisq_pdf",
    "chisq_quantile",
    "chisq_isf",
    "chisq1_pdf",
    "chisq1_quantile_from_survival",
    "noncentral_chisq1_pdf",
    "noncentral_chisq1_cdf",
    "noncentral_chisq1_sf",
    "noncentral_chisq1_isf",
    "regularized_beta",
    "f_sf",
    "f_pdf",
    "f_isf",
]

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000
_SOLVER_RTOL = 1e-12
_SOLVER_MAXITER = 200
_SERIES_RTOL = 1e-15
_SERIES_CAP = 1000


def _finite(x: float, name: str = "x") -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x}")
    return x


def _probability(p: float, name: str = "p", *, open_left=True, open_right=True) -> float:
    p = float(p)
    lo_bad = p <= 0.0 if open_left else p < 0.0
    hi_bad = p >= 1.0 if open_right else p > 1.0
    if math.isnan(p) or lo_bad or hi_bad:
        raise DomainError(f"{name} out of range: {p}")
    return p


# ---------------------------------------------------------------------------
# Standard normal
# ---------------------------------------------------------------------------

def std_normal_cdf(x: float) -> float:
    """Phi(x), evaluated through erfc so both tails keep full relative accuracy."""
    x = _finite(x)
    return 0.5 * math.erfc(-x / _SQRT2)


def std_normal_sf(x: float) -> float:
    """1 - Phi(x) without cancellation."""
    x = _finite(x)
    return 0.5 * math.erfc(x / _SQRT2)


def std_normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x - _LOG_SQRT_2PI)


_erfc_ufunc = np.frompyfunc(math.erfc, 1, 1)


def std_normal_sf_array(x) -> np.ndarray:
    """Elementwise ``std_normal_sf`` for arrays."""
    x = np.asarray(x, dtype=float)
    return 0.5 * _erfc_ufunc(x / _SQRT2).astype(float)


def _ppnd16(p: float) -> float:
    # Wichura (1988), algorithm AS 241.
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2509.0809287301226727 * r + 33430.575583588128105) * r
                    + 67265.770927008700853) * r + 45921.953931549871457) * r
                  + 13731.693765509461125) * r + 1971.5909503065514427) * r
                + 133.14166789178437745) * r + 3.387132872796366608)
        den = (((((((5226.495278852545925 * r + 28729.085735721942674) * r
                    + 39307.89580009271061) * r + 21213.794301586595867) * r
                  + 5394.1960214247511077) * r + 687.1870074920579083) * r
                + 42.313330701600911252) * r + 1.0)
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r
                    + 0.24178072517745061177) * r + 1.27045825245236838258) * r
                  + 3.64784832476320460504) * r + 5.7694972214606914055) * r
                + 4.6303378461565452959) * r + 1.42343711074968357734)
        den = (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r
                    + 0.0151986665636164571966) * r + 0.14810397642748007459) * r
                  + 0.68976733498510000455) * r + 1.6763848301838038494) * r
                + 2.05319162663775882187) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 0.0012426609473880784386) * r + 0.026532189526576123093) * r
                  + 0.29656057182850489123) * r + 1.7848265399172913358) * r
                + 5.4637849111641143699) * r + 6.6579046435011037772)
        den = (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r
                    + 1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r
                  + 0.0148753612908506148525) * r + 0.13692988092273580531) * r
                + 0.59983220655588793769) * r + 1.0)
    val = num / den
    return -val if q < 0.0 else val


def _lower_tail_quantile(p: float) -> float:
    # p <= 0.5; one Halley step against erfc tightens the rational approximation.
    x = _ppnd16(p)
    if x > -38.0:
        err = 0.5 * math.erfc(-x / _SQRT2) - p
        u = err / std_normal_pdf(x)
        x -= u / (1.0 + 0.5 * x * u)
    return x


def std_normal_quantile(p: float) -> float:
    """Inverse of ``std_normal_cdf`` on (0, 1); exactly antisymmetric about 0.5."""
    p = _probability(p)
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return _lower_tail_quantile(p)
    return -_lower_tail_quantile(1.0 - p)


def std_normal_isf(q: float) -> float:
    """Upper-tail quantile: the x with ``std_normal_sf(x) == q``."""
    q = _probability(q, "q")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return -_lower_tail_quantile(q)
    return _lower_tail_quantile(1.0 - q)


# ---------------------------------------------------------------------------
# Regularized incomplete gamma, log-space
# ---------------------------------------------------------------------------

def _log_gamma_p_series(a: float, x: float) -> float:
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if term < total * _EPS:
            break
    return math.log(total) - x + a * math.log(x) - math.lgamma(a)


def _log_gamma_q_cf(a: float, x: float) -> float:
    # Modified Lentz evaluation of the Legendre continued fraction.
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.log(h) - x + a * math.log(x) - math.lgamma(a)


def _log1mexp(lx: float) -> float:
    """log(1 - exp(lx)) for lx <= 0."""
    if lx > -0.6931471805599453:
        return math.log(-math.expm1(lx))
    return math.log1p(-math.exp(lx))


def _log_gamma_pq(a: float, x: float) -> tuple[float, float]:
    if x <= 0.0:
        return -math.inf, 0.0
    if math.isinf(x):
        return 0.0, -math.inf
    if x < a + 1.0:
        lp = _log_gamma_p_series(a, x)
        lp = min(lp, 0.0)
        return lp, (_log1mexp(lp) if lp < 0.0 else -math.inf)
    lq = min(_log_gamma_q_cf(a, x), 0.0)
    return (_log1mexp(lq) if lq < 0.0 else -math.inf), lq


def regularized_gamma_p(a: float, x: float) -> float:
    """Lower regularized incomplete gamma P(a, x)."""
    if a <= 0.0 or x < 0.0:
        raise DomainError(f"need a > 0 and x >= 0, got a={a}, x={x}")
    return math.exp(_log_gamma_pq(a, x)[0])


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if a <= 0.0 or x < 0.0:
        raise DomainError(f"need a > 0 and x >= 0, got a={a}, x={x}")
    return math.exp(_log_gamma_pq(a, x)[1])


# ---------------------------------------------------------------------------
# Central chi-square
# ---------------------------------------------------------------------------

def _check_chisq(y: float, df: float) -> tuple[float, float]:
    y = float(y)
    df = float(df)
    if not df > 0.0 or not math.isfinite(df):
        raise DomainError(f"df must be positive and finite, got {df}")
    if math.isnan(y) or y < 0.0:
        raise DomainError(f"y must be >= 0, got {y}")
    return y, df


def chisq_cdf(y: float, df: float) -> float:
    y, df = _check_chisq(y, df)
    return math.exp(_log_gamma_pq(0.5 * df, 0.5 * y)[0])


def chisq_sf(y: float, df: float) -> float:
    y, df = _check_chisq(y, df)
    return math.exp(_log_gamma_pq(0.5 * df, 0.5 * y)[1])


def chisq_logsf(y: float, df: float) -> float:
    y, df = _check_chisq(y, df)
    return _log_gamma_pq(0.5 * df, 0.5 * y)[1]


def _chisq_logpdf(y: float, df: float) -> float:
    a = 0.5 * df
    return (a - 1.0) * math.log(y) - 0.5 * y - a * math.log(2.0) - math.lgamma(a)


def chisq_pdf(y: float, df: float) -> float:
    y, df = _check_chisq(y, df)
    if y == 0.0:
        if df < 2.0:
            return math.inf
        return 0.5 if df == 2.0 else 0.0
    return math.exp(_chisq_logpdf(y, df))


def chisq1_pdf(y: float) -> float:
    """Density of chi-square(1): exp(-y/2) / sqrt(2 pi y)."""
    y = float(y)
    if not y > 0.0:
        raise DomainError(f"y must be > 0, got {y}")
    return math.exp(-0.5 * y - _LOG_SQRT_2PI) / math.sqrt(y)


def _solve_increasing(
    g: Callable[[float], float],
    dg: Callable[[float], float],
    x0: float,
    lo: float,
    hi: float | None,
) -> float:
    """Root of an increasing function on [lo, hi] by bracketed Newton.

    ``hi=None`` means the upper bracket is found by doubling from ``x0``.
    """
    if hi is None:
        hi = max(x0, 1.0)
        while g(hi) < 0.0:
            lo = hi
            hi *= 2.0
            if hi > 1e300:
                raise DomainError("quantile bracket search overflowed")
    x = min(max(x0, lo), hi)
    if not lo < x < hi:
        x = 0.5 * (lo + hi)
    for _ in range(_SOLVER_MAXITER):
        gx = g(x)
        if gx == 0.0:
            return x
        if gx < 0.0:
            lo = x
        else:
            hi = x
        slope = dg(x)
        step = gx / slope if slope > 0.0 and math.isfinite(slope) else math.nan
        x_new = x - step
        if not (lo < x_new < hi) or not math.isfinite(x_new):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= _SOLVER_RTOL * abs(x_new) or hi - lo <= _SOLVER_RTOL * abs(hi):
            return x_new
        x = x_new
    return x


def chisq_isf(q: float, df: float) -> float:
    """The y with ``chisq_sf(y, df) == q``, solved in log-survival space."""
    q = _probability(q, "q", open_right=False)
    _, df = _check_chisq(0.0, df)
    if q == 1.0:
        return 0.0
    if q > 0.5:
        return chisq_quantile(1.0 - q, df)
    target = math.log(q)
    a = 0.5 * df

    def g(y):  # increasing in y
        return target - _log_gamma_pq(a, 0.5 * y)[1]

    def dg(y):
        return math.exp(_chisq_logpdf(y, df) - _log_gamma_pq(a, 0.5 * y)[1])

    return _solve_increasing(g, dg, _wilson_hilferty(1.0 - q, df, upper=q), 0.0, None)


def chisq_quantile(p: float, df: float) -> float:
    """The y with ``chisq_cdf(y, df) == p``."""
    p = _probability(p, open_left=False)
    _, df = _check_chisq(0.0, df)
    if p == 0.0:
        return 0.0
    if p > 0.5:
        return chisq_isf(1.0 - p, df)
    target = math.log(p)
    a = 0.5 * df

    def g(y):
        if y <= 0.0:
            return -math.inf
        return _log_gamma_pq(a, 0.5 * y)[0] - target

    def dg(y):
        return math.exp(_chisq_logpdf(y, df) - _log_gamma_pq(a, 0.5 * y)[0])

    return _solve_increasing(g, dg, _wilson_hilferty(p, df), 0.0, None)


def _wilson_hilferty(p: float, df: float, upper: float | None = None) -> float:
    z = std_normal_isf(upper) if upper is not None else std_normal_quantile(p)
    c = 2.0 / (9.0 * df)
    guess = df * (1.0 - c + z * math.sqrt(c)) ** 3
    if guess <= 0.0:
        # small-df lower tail: P(df/2, y/2) ~ (y/2)^a / Gamma(a+1)
        a = 0.5 * df
        guess = 2.0 * math.exp((math.log(p) + math.lgamma(a + 1.0)) / a)
    return guess


def chisq1_quantile_from_survival(q: float) -> float:
    """Chi-square(1) quantile for upper-tail probability ``q``.

    Equivalent to ``F^{-1}(1 - q)`` but never forms ``1 - q``, so it is exact
    in the far tail (``q`` down to the smallest normal double).
    """
    q = float(q)
    if math.isnan(q) or q <= 0.0 or q > 1.0:
        raise DomainError(f"q must lie in (0, 1], got {q}")
    if q == 1.0:
        return 0.0
    target = math.log(q)
    # chi2(1) survival is 2*(1 - Phi(sqrt(y))): the normal tail quantile is a near-exact start
    z = std_normal_isf(0.5 * q)
    x0 = z * z

    def g(y):
        return target - _log_gamma_pq(0.5, 0.5 * y)[1]

    def dg(y):
        return math.exp(_chisq_logpdf(y, 1.0) - _log_gamma_pq(0.5, 0.5 * y)[1])

    return _solve_increasing(g, dg, x0, 0.0, None)


# ---------------------------------------------------------------------------
# Noncentral chi-square with one degree of freedom
# ---------------------------------------------------------------------------

def _check_noncentrality(lam: float) -> float:
    lam = float(lam)
    if math.isnan(lam) or lam < 0.0 or math.isinf(lam):
        raise DomainError(f"noncentrality must be finite and >= 0, got {lam}")
    return lam


def noncentral_chisq1_pdf(y: float, lam: float) -> float:
    """Density of chi-square(1) with noncentrality ``lam`` (power series in lam*y)."""
    y = float(y)
    if not y > 0.0:
        raise DomainError(f"y must be > 0, got {y}")
    lam = _check_noncentrality(lam)
    if lam == 0.0:
        return chisq1_pdf(y)
    # term_k = (lam y / 4)^k / (k! Gamma(k + 1/2)), starting from 1/Gamma(1/2)
    z = 0.25 * lam * y
    term = 1.0 / math.sqrt(math.pi)
    total = term
    for k in range(_SERIES_CAP):
        term *= z / ((k + 1.0) * (k + 0.5))
        total += term
        if term < _SERIES_RTOL * total:
            break
    return math.exp(-0.5 * (y + lam) - 0.5 * math.log(y) - 0.5 * math.log(2.0)) * total


def _poisson_mixture(lam: float, component: Callable[[int], float]) -> float:
    half = 0.5 * lam
    if half == 0.0:
        # lam so small that lam/2 underflows: all Poisson mass sits at k = 0
        return component(0)
    mode = int(half)
    log_half = math.log(half)
    total = 0.0
    for k in range(_SERIES_CAP):
        weight = math.exp(-half + k * log_half - math.lgamma(k + 1.0))
        total += weight * component(k)
        if k > mode and weight < _SERIES_RTOL * max(total, _TINY):
            break
    return total


def noncentral_chisq1_cdf(y: float, lam: float) -> float:
    """Poisson(lam/2) mixture of central chi-square(2k+1) distribution functions."""
    y = float(y)
    if math.isnan(y) or y < 0.0:
        raise DomainError(f"y must be >= 0, got {y}")
    lam = _check_noncentrality(lam)
    if y == 0.0:
        return 0.0
    if lam == 0.0:
        return chisq_cdf(y, 1.0)
    return min(1.0, _poisson_mixture(lam, lambda k: chisq_cdf(y, 2.0 * k + 1.0)))


def noncentral_chisq1_sf(y: float, lam: float) -> float:
    y = float(y)
    if math.isnan(y) or y < 0.0:
        raise DomainError(f"y must be >= 0, got {y}")
    lam = _check_noncentrality(lam)
    if y == 0.0:
        return 1.0
    if lam == 0.0:
        return chisq_sf(y, 1.0)
    return min(1.0, _poisson_mixture(lam, lambda k: chisq_sf(y, 2.0 * k + 1.0)))


def noncentral_chisq1_isf(q: float, lam: float) -> float:
    """The y with ``noncentral_chisq1_sf(y, lam) == q``."""
    q = float(q)
    if math.isnan(q) or q <= 0.0 or q > 1.0:
        raise DomainError(f"q must lie in (0, 1], got {q}")
    lam = _check_noncentrality(lam)
    if lam == 0.0:
        return chisq1_quantile_from_survival(q)
    if q == 1.0:
        return 0.0
    target = math.log(q)

    def g(y):
        if y <= 0.0:
            return target
        return target - math.log(max(noncentral_chisq1_sf(y, lam), _TINY))

    def dg(y):
        return noncentral_chisq1_pdf(y, lam) / max(noncentral_chisq1_sf(y, lam), _TINY)

    z = std_normal_isf(0.5 * q) + math.sqrt(lam)
    return _solve_increasing(g, dg, z * z, 0.0, None)


# ---------------------------------------------------------------------------
# Incomplete beta and the F distribution
# ---------------------------------------------------------------------------

def _betacf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


def regularized_beta(x: float, a: float, b: float) -> float:
    """I_x(a, b) by the Lentz continued fraction on the convergent side."""
    if a <= 0.0 or b <= 0.0:
        raise DomainError(f"need a, b > 0, got a={a}, b={b}")
    if math.isnan(x) or x < 0.0 or x > 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b


def f_sf(x: float, d1: float, d2: float) -> float:
    """Upper tail of the F(d1, d2) distribution."""
    if d1 <= 0.0 or d2 <= 0.0:
        raise DomainError("degrees of freedom must be positive")
    if x <= 0.0:
        return 1.0
    return regularized_beta(d2 / (d2 + d1 * x), 0.5 * d2, 0.5 * d1)


def f_pdf(x: float, d1: float, d2: float) -> float:
    if x <= 0.0:
        return 0.0
    a, b = 0.5 * d1, 0.5 * d2
    log_pdf = (a * math.log(d1) + b * math.log(d2) + (a - 1.0) * math.log(x)
               - (a + b) * math.log(d2 + d1 * x)
               - (math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)))
    return math.exp(log_pdf)


def f_isf(q: float, d1: float, d2: float) -> float:
    """Critical value c with ``f_sf(c, d1, d2) == q``."""
    q = _probability(q, "q")

    def g(x):
        return q - f_sf(x, d1, d2) if x > 0.0 else q - 1.0

    def dg(x):
        return f_pdf(x, d1, d2)

    return _solve_increasing(g, dg, 1.0, 0.0, None)
