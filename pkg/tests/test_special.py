import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from orderthresh import special
from orderthresh.errors import DomainError

mpmath.mp.dps = 40


def mp_norm_cdf(x):
    return float(mpmath.ncdf(x))


def mp_chisq_cdf(y, df):
    return float(mpmath.gammainc(mpmath.mpf(df) / 2, 0, mpmath.mpf(y) / 2, regularized=True))


def mp_chisq_sf(y, df):
    return float(mpmath.gammainc(mpmath.mpf(df) / 2, mpmath.mpf(y) / 2, mpmath.inf, regularized=True))


class TestNormal:
    def test_center(self):
        assert special.std_normal_cdf(0.0) == 0.5

    def test_saturation(self):
        assert abs(special.std_normal_cdf(40.0) - 1.0) <= 1e-15
        assert special.std_normal_sf(37.0) > 0.0  # 40 underflows double precision

    def test_975_point(self):
        assert special.std_normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-7)

    @pytest.mark.parametrize("x", [-38.0, -8.5, -3.0, -1.0, -0.1, 0.3, 1.7, 5.0, 12.0])
    def test_cdf_matches_mpmath(self, x):
        assert special.std_normal_cdf(x) == pytest.approx(mp_norm_cdf(x), rel=1e-13, abs=1e-300)
        assert special.std_normal_sf(x) == pytest.approx(mp_norm_cdf(-x), rel=1e-13, abs=1e-300)

    @given(st.floats(-30, 30))
    def test_symmetry(self, x):
        assert abs(special.std_normal_cdf(x) + special.std_normal_cdf(-x) - 1.0) <= 1e-15

    @given(st.floats(-20, 20), st.floats(0.0, 5.0))
    def test_monotone(self, x, dx):
        assert special.std_normal_cdf(x) <= special.std_normal_cdf(x + dx)

    def test_quantile_points(self):
        assert special.std_normal_quantile(0.5) == 0.0
        assert special.std_normal_quantile(0.975) == pytest.approx(1.959963984540054, abs=1e-12)

    @given(st.floats(1e-300, 1 - 1e-12))
    def test_quantile_roundtrip(self, p):
        x = special.std_normal_quantile(p)
        assert special.std_normal_cdf(x) == pytest.approx(p, rel=1e-10, abs=1e-10)

    # below ~1e-6 the rounding in 1 - p itself dominates the comparison
    @given(st.floats(1e-6, 0.5))
    def test_quantile_antisymmetry(self, p):
        assert special.std_normal_quantile(p) == pytest.approx(-special.std_normal_quantile(1 - p), abs=1e-9)

    @pytest.mark.parametrize("q", [1e-300, 1e-100, 1e-20, 1e-5, 0.05, 0.4])
    def test_isf_matches_mpmath(self, q):
        expected = float(-mpmath.sqrt(2) * mpmath.erfinv(2 * mpmath.mpf(q) - 1)) if q > 1e-15 else None
        got = special.std_normal_isf(q)
        if expected is not None:
            assert got == pytest.approx(expected, rel=1e-12)
        assert special.std_normal_sf(got) == pytest.approx(q, rel=1e-10)

    @pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5, math.nan])
    def test_quantile_domain(self, bad):
        with pytest.raises(DomainError):
            special.std_normal_quantile(bad)

    @pytest.mark.parametrize("bad", [math.inf, -math.inf, math.nan])
    def test_cdf_rejects_non_finite(self, bad):
        with pytest.raises(DomainError):
            special.std_normal_cdf(bad)

    def test_sf_array_matches_scalar(self):
        x = np.array([-3.0, 0.0, 0.5, 2.0, 9.0])
        np.testing.assert_array_equal(special.std_normal_sf_array(x), [special.std_normal_sf(v) for v in x])


class TestChiSquare:
    def test_zero(self):
        assert special.chisq_cdf(0.0, 1.0) == 0.0
        assert special.chisq_sf(0.0, 3.0) == 1.0

    def test_median_df1(self):
        assert special.chisq_cdf(0.454936, 1.0) == pytest.approx(0.5, abs=1e-6)

    @given(st.floats(0.0, 200.0))
    def test_df2_closed_form(self, y):
        assert special.chisq_cdf(y, 2.0) == pytest.approx(-math.expm1(-y / 2), rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize("df", [0.3, 1.0, 2.5, 7.0, 31.7, 500.0, 4000.0])
    @pytest.mark.parametrize("ratio", [0.01, 0.3, 0.9, 1.0, 1.2, 3.0, 10.0])
    def test_incomplete_gamma_matches_mpmath(self, df, ratio):
        y = df * ratio
        cdf, sf = mp_chisq_cdf(y, df), mp_chisq_sf(y, df)
        assert abs(special.chisq_cdf(y, df) - cdf) <= 1e-12
        assert abs(special.chisq_sf(y, df) - sf) <= 1e-12
        # tails stay accurate in relative terms too
        assert special.chisq_cdf(y, df) == pytest.approx(cdf, rel=1e-10, abs=1e-300)
        assert special.chisq_sf(y, df) == pytest.approx(sf, rel=1e-10, abs=1e-300)

    def test_extreme_upper_tail_in_log_space(self):
        y = 1400.0
        expected = float(mpmath.log(mpmath.gammainc(0.5, y / 2, mpmath.inf, regularized=True)))
        assert special.chisq_logsf(y, 1.0) == pytest.approx(expected, rel=1e-13)

    def test_negative_y_rejected(self):
        with pytest.raises(DomainError):
            special.chisq_cdf(-1.0, 1.0)
        with pytest.raises(DomainError):
            special.chisq_cdf(1.0, 0.0)

    @pytest.mark.parametrize("df", [0.7, 1.0, 4.0, 55.5, 1000.0])
    @pytest.mark.parametrize("q", [1e-12, 1e-4, 0.05, 0.5, 0.95])
    def test_isf_roundtrip(self, df, q):
        y = special.chisq_isf(q, df)
        assert special.chisq_sf(y, df) == pytest.approx(q, rel=1e-10)
        assert y == pytest.approx(stats.chi2.isf(q, df), rel=1e-9)

    @pytest.mark.parametrize("df", [1.0, 3.0, 20.0])
    def test_quantile_roundtrip(self, df):
        for p in (1e-9, 0.01, 0.5, 0.99):
            assert special.chisq_cdf(special.chisq_quantile(p, df), df) == pytest.approx(p, rel=1e-10)

    def test_chisq1_pdf_closed_form(self):
        assert special.chisq1_pdf(1.0) == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi), rel=1e-15)
        assert special.chisq1_pdf(1.0) == pytest.approx(0.241971, abs=1e-6)

    def test_chisq1_pdf_normalized(self):
        val, _ = integrate.quad(special.chisq1_pdf, 0, math.inf, limit=200)
        assert val == pytest.approx(1.0, abs=1e-8)

    def test_chisq1_pdf_root_singularity(self):
        # y^{-1/2} divergence: f(y) sqrt(y) -> 1/sqrt(2 pi)
        for y in (1e-6, 1e-10, 1e-14):
            assert special.chisq1_pdf(y) * math.sqrt(y) == pytest.approx(1 / math.sqrt(2 * math.pi), rel=1e-5)

    def test_chisq1_pdf_domain(self):
        with pytest.raises(DomainError):
            special.chisq1_pdf(0.0)

    @pytest.mark.parametrize("df,y", [(0.5, 0.0), (2.0, 0.0), (3.0, 0.0), (5.5, 2.2)])
    def test_general_pdf(self, df, y):
        assert special.chisq_pdf(y, df) == pytest.approx(stats.chi2.pdf(y, df), rel=1e-12)


class TestQuantileFromSurvival:
    def test_half(self):
        assert special.chisq1_quantile_from_survival(0.5) == pytest.approx(0.454936423119572, rel=1e-12)

    def test_one(self):
        assert special.chisq1_quantile_from_survival(1.0) == 0.0

    @pytest.mark.parametrize("exp", range(1, 13))
    def test_roundtrip_through_cdf(self, exp):
        q = 10.0 ** -exp
        y = special.chisq1_quantile_from_survival(q)
        assert special.chisq_cdf(y, 1.0) == pytest.approx(1.0 - q, abs=1e-10)

    @pytest.mark.parametrize("q", [1e-12, 1e-50, 1e-300])
    def test_log_survival_accuracy(self, q):
        y = special.chisq1_quantile_from_survival(q)
        logsf = float(mpmath.log(mpmath.erfc(mpmath.sqrt(mpmath.mpf(y) / 2))))
        assert abs(logsf - math.log(q)) <= 4 * np.spacing(abs(math.log(q)))

    @pytest.mark.parametrize("bad", [0.0, -1e-3, 1.5])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            special.chisq1_quantile_from_survival(bad)


class TestNoncentral:
    @given(st.floats(1e-6, 60.0))
    def test_lambda_zero_reduces(self, y):
        assert special.noncentral_chisq1_pdf(y, 0.0) == pytest.approx(special.chisq1_pdf(y), rel=1e-14)
        assert special.noncentral_chisq1_cdf(y, 0.0) == pytest.approx(special.chisq_cdf(y, 1.0), rel=1e-14)

    def test_point_values(self):
        assert special.noncentral_chisq1_pdf(1.0, 0.0) == pytest.approx(0.241971, abs=1e-6)
        assert special.noncentral_chisq1_cdf(0.0, 2.0) == 0.0
        assert special.noncentral_chisq1_cdf(3.841459, 0.0) == pytest.approx(0.95, abs=1e-7)

    @pytest.mark.parametrize("lam", [0.1, 0.5, 2.0, 10.0, 50.0])
    @pytest.mark.parametrize("y", [0.05, 1.0, 2.0, 7.5, 40.0])
    def test_against_scipy(self, lam, y):
        assert special.noncentral_chisq1_pdf(y, lam) == pytest.approx(stats.ncx2.pdf(y, 1, lam), rel=1e-9)
        assert special.noncentral_chisq1_cdf(y, lam) == pytest.approx(stats.ncx2.cdf(y, 1, lam), rel=1e-9, abs=1e-14)

    def test_pdf_against_direct_simulation(self):
        # density of (Z + sqrt(0.5))^2 at 2 from a narrow histogram bin
        rng = np.random.default_rng(2024)
        m, h = 10_000_000, 0.02
        y = (rng.standard_normal(m) + math.sqrt(0.5)) ** 2
        p_bin = np.count_nonzero(np.abs(y - 2.0) < h / 2) / m
        est, se = p_bin / h, math.sqrt(p_bin * (1 - p_bin) / m) / h
        assert abs(special.noncentral_chisq1_pdf(2.0, 0.5) - est) < 3 * se

    @pytest.mark.parametrize("lam", [0.0, 0.5, 5.0])
    def test_pdf_normalized(self, lam):
        f = lambda y: special.noncentral_chisq1_pdf(y, lam)
        total = sum(integrate.quad(f, lo, hi, limit=200)[0] for lo, hi in ((0, 1), (1, 20), (20, math.inf)))
        assert total == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("lam", [0.3, 4.0])
    def test_cdf_derivative_is_pdf(self, lam):
        for y in np.linspace(0.2, 12.0, 20):
            h = 1e-5 * max(1.0, y)
            deriv = (special.noncentral_chisq1_cdf(y + h, lam) - special.noncentral_chisq1_cdf(y - h, lam)) / (2 * h)
            assert deriv == pytest.approx(special.noncentral_chisq1_pdf(y, lam), abs=1e-6)

    @given(st.floats(0.01, 30.0), st.floats(0.0, 20.0), st.floats(0.01, 5.0))
    @settings(max_examples=50)
    def test_monotone_in_y_and_lambda(self, y, lam, step):
        assert special.noncentral_chisq1_cdf(y, lam) <= special.noncentral_chisq1_cdf(y + step, lam) + 1e-15
        assert special.noncentral_chisq1_cdf(y, lam + step) <= special.noncentral_chisq1_cdf(y, lam) + 1e-15

    @pytest.mark.parametrize("lam", [5e-324, 1e-310])
    def test_subnormal_noncentrality_is_central(self, lam):
        for y in (0.3, 1.0, 7.0):
            assert special.noncentral_chisq1_cdf(y, lam) == pytest.approx(special.chisq_cdf(y, 1.0), rel=1e-14)
            assert special.noncentral_chisq1_sf(y, lam) == pytest.approx(special.chisq_sf(y, 1.0), rel=1e-14)

    def test_isf_roundtrip(self):
        for lam in (0.0, 1.0, 9.0):
            y = special.noncentral_chisq1_isf(0.01, lam)
            assert special.noncentral_chisq1_sf(y, lam) == pytest.approx(0.01, rel=1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            special.noncentral_chisq1_pdf(0.0, 1.0)
        with pytest.raises(DomainError):
            special.noncentral_chisq1_pdf(1.0, -0.1)


class TestBetaAndF:
    @pytest.mark.parametrize("a,b,x", [(0.5, 0.5, 0.3), (2.0, 7.0, 0.2), (50.0, 4000.0, 0.011), (999.0, 2000.0, 0.33)])
    def test_regularized_beta(self, a, b, x):
        assert special.regularized_beta(x, a, b) == pytest.approx(float(mpmath.betainc(a, b, 0, x, regularized=True)), rel=1e-11)

    @pytest.mark.parametrize("d1,d2", [(2, 5), (49, 100), (999, 4000)])
    def test_f_against_scipy(self, d1, d2):
        for x in (0.5, 1.0, 1.3, 3.0):
            assert special.f_sf(x, d1, d2) == pytest.approx(stats.f.sf(x, d1, d2), rel=1e-9, abs=1e-300)
            assert special.f_pdf(x, d1, d2) == pytest.approx(stats.f.pdf(x, d1, d2), rel=1e-9, abs=1e-300)
        assert special.f_isf(0.05, d1, d2) == pytest.approx(stats.f.isf(0.05, d1, d2), rel=1e-9)
