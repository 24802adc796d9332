import math

import numpy as np
import pytest
from scipy import integrate, stats

from orderthresh import montecarlo as mc
from orderthresh.errors import DomainError


class TestStream:
    def test_same_seed_and_index_repeat(self):
        a = mc.normal_variate_stream(7, 3).standard_normal(1000)
        b = mc.normal_variate_stream(7, 3).standard_normal(1000)
        np.testing.assert_array_equal(a, b)

    def test_distinct_indices_and_seeds_differ(self):
        a = mc.normal_variate_stream(7, 3).standard_normal(10)
        assert not np.array_equal(a, mc.normal_variate_stream(7, 4).standard_normal(10))
        assert not np.array_equal(a, mc.normal_variate_stream(8, 3).standard_normal(10))

    def test_creation_order_irrelevant(self):
        first = [mc.normal_variate_stream(1, i).standard_normal(5) for i in range(5)]
        second = [mc.normal_variate_stream(1, i).standard_normal(5) for i in reversed(range(5))][::-1]
        for x, y in zip(first, second):
            np.testing.assert_array_equal(x, y)

    def test_moments_at_one_million(self):
        x = mc.normal_variate_stream(0, 0).standard_normal(1_000_000)
        assert abs(x.mean()) < 4 / math.sqrt(1e6)
        assert abs(x.var() - 1) < 0.01

    def test_adjacent_streams_uncorrelated(self):
        x = np.array([mc.normal_variate_stream(0, i).standard_normal(200) for i in range(200)])
        c = np.corrcoef(x)
        off = c[~np.eye(200, dtype=bool)]
        assert np.abs(off).max() < 0.35
        assert abs(off.mean()) < 0.01

    def test_domain(self):
        with pytest.raises(DomainError):
            mc.normal_variate_stream(-1, 0)


class TestStatistic:
    def test_parse(self):
        s = mc.Statistic.parse("order:22")
        assert s == mc.Statistic("order", 22) and str(s) == "order:22"
        assert mc.Statistic.parse("hard:5.1216").parameter_label == "5.1216"
        assert mc.Statistic.parse("order-dd").parameter_label == "khat"
        assert mc.Statistic.parse("simes").parameter_label == ""

    @pytest.mark.parametrize("text", ["bogus", "order", "order:0", "order:2.5", "hard:-1", "simes:3", "order:x"])
    def test_bad(self, text):
        with pytest.raises(DomainError):
            mc.Statistic.parse(text)


class TestScenarios:
    def test_catalog_vectors(self):
        cat = mc.scenario_catalog()
        e31 = cat["ex3.1"].eta
        assert len(e31) == 30 and sum(abs(e) > 3 for e in e31) == 2
        assert len(cat["ex3.2"].eta) == 30
        assert cat["ex3.3"].eta == (2.0,) * 30
        assert len(cat["ex4.1"].eta) == 20 and len(cat["ex4.2"].eta) == 20
        assert max(cat["ex4.2"].eta) == 2.1458
        assert cat["ex3.1"].eta[:3] == (1.0674, -0.1656, 1.6253)
        assert cat["ex4.1"].eta[:3] == (1.8005, -1.0754, 0.4274)
        assert cat["ex3.2"].eta[:3] == (0.0512, 1.4647, 0.4995)
        assert cat["ex4.2"].eta[:3] == (1.0949, 0.5511, 1.7587)

    def test_shift_window(self):
        sc = mc.SimulationScenario(mc.SINGLE, 10, eta=(1.0, 2.0, 3.0), shift_r=2)
        np.testing.assert_array_equal(sc.theta(), [2, 3, 0, 0, 0, 0, 0, 0, 0, 0])
        assert sc.k_opt == 2
        beyond = mc.SimulationScenario(mc.SINGLE, 10, eta=(1.0, 2.0, 3.0), shift_r=4)
        assert beyond.k_opt == 0

    def test_family_labels(self):
        fam = mc.scenario_catalog()["ex3.3"]
        assert fam.scenario(1).name == "H1"
        assert fam.scenario(31).name == "H0G"
        assert len(fam.scenarios()) == 30

    @pytest.mark.parametrize("kwargs", [
        dict(kind="other", n=5),
        dict(kind=mc.SINGLE, n=1),
        dict(kind=mc.HANOVA, n=5),
        dict(kind=mc.SINGLE, n=5, eta=(1.0,), shift_r=3),
        dict(kind=mc.SINGLE, n=2, eta=(1.0, 1.0, 1.0)),
        dict(kind=mc.SINGLE, n=5, noise="t3"),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            mc.SimulationScenario(**kwargs)


class TestStudies:
    def test_hundred_replicates_give_percent_rates(self):
        res = mc.run_type1_study(50, ["order:5", "chisq", "simes", "hard:2.0"], 100, seed=3)
        for row in res.rows:
            assert round(row.rate * 100) == pytest.approx(row.rate * 100, abs=1e-9)
            assert 0 <= row.rate <= 1

    def test_minimum_replicates(self):
        with pytest.raises(DomainError):
            mc.run_type1_study(50, ["order:5"], 99, seed=0)

    def test_thread_count_does_not_change_output(self):
        stats_ = ["order:7", "order-chisq:7", "hard-asym:3.0", "simes", "chisq", "order-dd", "order-chisq-dd"]
        one = mc.run_type1_study([60, 200], stats_, 3000, seed=5, threads=1).to_csv()
        four = mc.run_type1_study([60, 200], stats_, 3000, seed=5, threads=4).to_csv()
        assert one == four
        h1 = mc.run_type1_study((40, 3), ["hanova-order:4", "f", "hanova-order-dd"], 500, seed=5, threads=1)
        h3 = mc.run_type1_study((40, 3), ["hanova-order:4", "f", "hanova-order-dd"], 500, seed=5, threads=3)
        assert h1.to_csv() == h3.to_csv()

    def test_rerun_is_byte_identical(self):
        a = mc.run_power_study("ex3.1", ["order:15", "chisq"], 200, seed=2, shifts=[1, 10])
        b = mc.run_power_study("ex3.1", ["order:15", "chisq"], 200, seed=2, shifts=[1, 10])
        assert a.to_csv() == b.to_csv()

    def test_csv_columns_and_se(self):
        res = mc.run_type1_study(30, ["order:3"], 400, seed=1)
        lines = res.to_csv().splitlines()
        assert lines[0] == "scenario,statistic,parameter,rate,replicates,se"
        row = res.rows[0]
        assert row.se == pytest.approx(math.sqrt(row.rate * (1 - row.rate) / 400))
        assert res.rate("n=30", "order:3") == row.rate
        with pytest.raises(KeyError):
            res.rate("n=30", "order:4")

    def test_hanova_alias(self):
        res = mc.run_type1_study((20, 3), ["order:4"], 100, seed=0)
        assert res.rows[0].statistic == "hanova-order"

    def test_kind_mismatch(self):
        with pytest.raises(DomainError):
            mc.run_type1_study(20, ["f"], 100, seed=0)
        with pytest.raises(DomainError):
            mc.run_type1_study((20, 3), ["hard:2.0"], 100, seed=0)

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            mc.run_power_study("ex9.9", ["chisq"], 100, seed=0)


class TestNullSanity:
    def test_single_statistics_within_band(self):
        stats_ = ["order:22", "order-chisq:22", "hard:5.1216", "hard-asym:5.1216", "simes", "chisq",
                  "order-dd", "order-chisq-dd"]
        reps = 30_000
        res = mc.run_type1_study(500, stats_, reps, seed=31)
        se = math.sqrt(0.05 * 0.95 / reps)
        for row in res.rows:
            assert 0.05 - 4 * se - 0.025 <= row.rate <= 0.05 + 4 * se + 0.025, row

    def test_hanova_statistics_within_band(self):
        reps = 30_000
        res = mc.run_type1_study((200, 4), ["hanova-order:14", "hanova-order-r1:14", "hanova-order-dd", "f"],
                                 reps, seed=32)
        se = math.sqrt(0.05 * 0.95 / reps)
        for row in res.rows:
            assert 0.05 - 4 * se - 0.025 <= row.rate <= 0.05 + 4 * se + 0.025, row

    def test_shift_beyond_support_is_null(self):
        fam = mc.scenario_catalog()["ex3.3"]
        res = mc.run_power_study(fam, ["order:15", "chisq"], 3000, seed=4, shifts=[31])
        se = math.sqrt(0.05 * 0.95 / 3000)
        for row in res.rows:
            assert row.k_opt == 0
            assert abs(row.rate - 0.05) < 4 * se + 0.025


class TestPowerMonotonicity:
    def test_scaled_equal_signal(self):
        reps = 3000
        stats_ = ["order:15", "order-chisq:15", "hard-asym:5.122", "simes", "chisq", "order-dd"]
        rates = []
        for c in (0.0, 1.0, 2.0):
            sc = mc.SimulationScenario(mc.SINGLE, 500, eta=(2.0 * c,) * 30) if c else mc.SimulationScenario(mc.SINGLE, 500)
            counts = mc.simulate(sc, stats_, reps, seed=8)
            rates.append(counts / reps)
        for lo, hi in zip(rates, rates[1:]):
            se = np.sqrt(np.maximum(lo * (1 - lo), hi * (1 - hi)) / reps)
            assert np.all(hi >= lo - 3 * se)

    def test_hanova_scaled_signal(self):
        reps = 1000
        rates = []
        for c in (0.0, 0.5, 1.0):
            eta = (c,) * 20 if c else ()
            sc = mc.SimulationScenario(mc.HANOVA, 3, 300, eta=eta)
            rates.append(mc.simulate(sc, ["hanova-order:20", "f"], reps, seed=9) / reps)
        for lo, hi in zip(rates, rates[1:]):
            se = np.sqrt(np.maximum(lo * (1 - lo), hi * (1 - hi)) / reps)
            assert np.all(hi >= lo - 3 * se)


class TestStandardizedSamples:
    def test_ks_to_normal(self):
        z = mc.standardized_samples(mc.SimulationScenario(mc.SINGLE, 2000), "order:500", 5000, seed=0)
        assert stats.kstest(z, "norm").statistic < 0.02

    def test_no_standardized_form(self):
        with pytest.raises(DomainError):
            mc.standardized_samples(mc.SimulationScenario(mc.SINGLE, 20), "simes", 10, seed=0)


class TestDensity:
    def test_kde_integrates_to_one(self):
        x = mc.normal_variate_stream(0, 0).standard_normal(3000)
        grid, f, h = mc.gaussian_kde(x)
        assert grid.size == 512
        assert grid[0] == pytest.approx(x.min() - 3 * h) and grid[-1] == pytest.approx(x.max() + 3 * h)
        assert abs(integrate.trapezoid(f, grid) - 1) < 1e-3

    def test_silverman_rule(self):
        x = np.arange(100.0)
        sd = x.std(ddof=1)
        iqr = np.subtract(*np.percentile(x, [75, 25]))
        assert mc.silverman_bandwidth(x) == pytest.approx(0.9 * min(sd, iqr / 1.34) * 100 ** -0.2)

    def test_export(self):
        curves = mc.density_export(200, ["order:35", "hard-asym:1.842"], 1000, seed=0)
        assert [(c.statistic, c.parameter) for c in curves] == [("order", "35"), ("hard-asym", "1.842")]
        for c in curves:
            assert abs(integrate.trapezoid(c.density, c.x) - 1) < 1e-3
            np.testing.assert_allclose(c.reference, stats.norm.pdf(c.x), rtol=1e-12)

    def test_export_minimum(self):
        with pytest.raises(DomainError):
            mc.density_export(200, ["order:35"], 999, seed=0)
