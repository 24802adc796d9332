"""Regeneration of the published level and power tables and density figures.

Each reproduction runs the Monte Carlo engine over the same rows and columns
as the published table and keeps the published values alongside, so the two
can be written side by side and diffed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

from . import calibration, montecarlo as mc
from .published import PUBLISHED

__all__ = [
    "K_GRID_LABELS",
    "k_grid",
    "Reproduction",
    "FigureReproduction",
    "REPRODUCTIONS",
    "FIGURES",
    "DEFAULT_REPLICATES",
    "reproduce",
]

K_GRID_LABELS = (
    "[log^1/2 n]", "[log n]", "[log^3/2 n]", "[n^1/2]",
    "[n^2/3]", "[n^3/4]", "[n^7/8]", "n",
)


def k_grid(n: int) -> list[int]:
    """Integer parts of the threshold grid used by the level tables."""
    log_n = math.log(n)
    raw = (log_n ** 0.5, log_n, log_n ** 1.5, n ** 0.5, n ** (2 / 3), n ** 0.75, n ** 0.875)
    # the small offset keeps exact powers such as 1000^(2/3) = 100 from flooring to 99
    return [max(1, math.floor(x + 1e-9)) for x in raw] + [n]


def _g6(x) -> str:
    return str(x) if isinstance(x, int) else f"{x:.6g}"


@dataclass
class Reproduction:
    name: str
    title: str
    columns: tuple[str, ...]
    rows: dict[str, tuple] = field(default_factory=dict)
    published: dict[str, tuple] = field(default_factory=dict)
    replicates: int = 0
    seed: int = 0
    long: mc.StudyResult = field(default_factory=mc.StudyResult)

    def _csv(self, rows: dict[str, tuple]) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("row",) + tuple(self.columns))
        for label, values in rows.items():
            w.writerow([label] + [_g6(v) for v in values])
        return buf.getvalue()

    def to_csv(self) -> str:
        return self._csv(self.rows)

    def published_csv(self) -> str:
        return self._csv(self.published)

    def differences(self) -> dict[str, tuple]:
        """Reproduced minus published, cell by cell (integer columns skipped as 0)."""
        out = {}
        for label, pub in self.published.items():
            got = self.rows[label]
            out[label] = tuple(0 if isinstance(p, int) else g - p for g, p in zip(got, pub))
        return out

    def max_abs_difference(self) -> float:
        return max(abs(d) for row in self.differences().values() for d in row)


def _level_table(name, title, columns, dims_rows, stats_for, replicates, seed, threads):
    rep = Reproduction(name, title, tuple(columns), published=PUBLISHED[name],
                       replicates=replicates, seed=seed)
    for label, dims in dims_rows:
        stats = stats_for(dims)
        result = mc.run_type1_study(dims, stats, replicates, seed, threads=threads)
        rep.rows[label] = tuple(r.rate for r in result.rows)
        rep.long.rows.extend(result.rows)
    return rep


_HARD_SHIFTS = {"table1": (-2.0, -1.6, -1.2, -0.8, -0.4, 0.0), "table2": (0.4, 0.8, 1.2, 1.6, 2.0)}
_SINGLE_NS = (50, 100, 200, 500)


def _hard_table(name):
    shifts = _HARD_SHIFTS[name]
    cols = [("delta" if h == 0 else f"delta{h:+.1f}") for h in shifts]

    def build(replicates, seed, threads):
        def stats(n):
            d = calibration.recommended_delta(n)
            return [mc.Statistic("hard-asym", d + h) for h in shifts]
        title = "Type I error of the hard threshold statistic around the recommended delta"
        return _level_table(name, title, cols, [(f"n={n}", n) for n in _SINGLE_NS],
                            stats, replicates, seed, threads)
    return build


def _order_level_table(name, stat_name, title):
    def build(replicates, seed, threads):
        def stats(n):
            return [mc.Statistic(stat_name, k) for k in k_grid(n)]
        return _level_table(name, title, K_GRID_LABELS, [(f"n={n}", n) for n in _SINGLE_NS],
                            stats, replicates, seed, threads)
    return build


def _table8(replicates, seed, threads):
    dims = [(f"a={a},n={n}", (a, n)) for a in (50, 100, 200, 500, 1000) for n in (3, 5)]

    def stats(an):
        return [mc.Statistic("hanova-order-r1", k) for k in k_grid(an[0])]
    title = "Type I error of the HANOVA order threshold statistic"
    return _level_table("table8", title, K_GRID_LABELS, dims, stats, replicates, seed, threads)


_SINGLE_POWER_KS = (15, 40, 70, 100, 200, 500)
_SINGLE_POWER_COLUMNS = ("k_opt", "T_S", "T_H(5.122)", "T_L(khat)", "bchi2(khat)") + tuple(
    f"T_L({k})" for k in _SINGLE_POWER_KS)
_HANOVA_POWER_KS = (20, 50, 100, 250, 500, 1000)
_HANOVA_POWER_COLUMNS = ("k_opt", "F") + tuple(f"T~_L({k})" for k in _HANOVA_POWER_KS)


def _power_table(name, family, columns, stats, title):
    def build(replicates, seed, threads):
        fam = mc.scenario_catalog()[family]
        rep = Reproduction(name, title, columns, published=PUBLISHED[name],
                           replicates=replicates, seed=seed)
        labels = list(rep.published)
        shifts = [len(fam.eta) + 1 if lab == "H0G" else int(lab[1:]) for lab in labels]
        result = mc.run_power_study(fam, stats, replicates, seed, shifts=shifts, threads=threads)
        per = len(stats)
        for i, (label, r) in enumerate(zip(labels, shifts)):
            chunk = result.rows[i * per:(i + 1) * per]
            rep.rows[label] = (fam.scenario(r).k_opt,) + tuple(row.rate for row in chunk)
        rep.long = result
        return rep
    return build


def _single_power_stats():
    delta = calibration.recommended_delta(500)
    return ([mc.Statistic("simes"), mc.Statistic("hard-asym", delta),
             mc.Statistic("order-dd"), mc.Statistic("order-chisq-dd")]
            + [mc.Statistic("order", k) for k in _SINGLE_POWER_KS])


_HANOVA_POWER_STATS = [mc.Statistic("f")] + [mc.Statistic("hanova-order-r1", k) for k in _HANOVA_POWER_KS]

REPRODUCTIONS: dict[str, tuple[int, Callable]] = {
    "table1": (30000, _hard_table("table1")),
    "table2": (30000, _hard_table("table2")),
    "table3": (30000, _order_level_table(
        "table3", "order", "Type I error of the order threshold statistic, normal reference")),
    "table3app": (30000, _order_level_table(
        "table3app", "order-chisq", "Type I error of the order threshold statistic, scaled chi-square reference")),
    "table4": (3000, _power_table("table4", "ex3.1", _SINGLE_POWER_COLUMNS, _single_power_stats(),
                                  "Power, normal-mean alternatives")),
    "table5": (3000, _power_table("table5", "ex3.2", _SINGLE_POWER_COLUMNS, _single_power_stats(),
                                  "Power, exponential-mean alternatives")),
    "table6": (3000, _power_table("table6", "ex3.3", _SINGLE_POWER_COLUMNS, _single_power_stats(),
                                  "Power, constant-mean alternatives")),
    "table8": (20000, _table8),
    "table9": (20000, _power_table("table9", "ex4.1", _HANOVA_POWER_COLUMNS, _HANOVA_POWER_STATS,
                                   "HANOVA power, uniform effects")),
    "table10": (20000, _power_table("table10", "ex4.2", _HANOVA_POWER_COLUMNS, _HANOVA_POWER_STATS,
                                    "HANOVA power, exponential effects")),
    "table11": (2000, _power_table("table11", "ex4.1", ("k_opt", "T~_L(khat)"),
                                   [mc.Statistic("hanova-order-dd-r1")],
                                   "HANOVA power with data-driven k")),
}


@dataclass
class FigureReproduction:
    name: str
    title: str
    curves: list[mc.DensityCurve]
    parameters: tuple[tuple[str, str], ...]
    replicates: int = 0
    seed: int = 0

    CSV_COLUMNS = ("statistic", "parameter", "x", "density", "normal")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        for c in self.curves:
            for x, f, ref in zip(c.x, c.density, c.reference):
                w.writerow([c.statistic, c.parameter, _g6(x), _g6(f), _g6(ref)])
        return buf.getvalue()

    def published_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("statistic", "parameter"))
        w.writerows(self.parameters)
        return buf.getvalue()


_FIG1 = (("hard-asym", "1.842"), ("hard-asym", "3.927"), ("hard-asym", "5.672"),
         ("order", "35"), ("order", "10"), ("order", "3"))
_FIG2 = (("hanova-order", "22"), ("hanova-order", "105"), ("hanova-order", "229"))


def _figure(name, title, scenario, params):
    def build(replicates, seed, threads):
        stats = [mc.Statistic.parse(f"{s}:{p}") for s, p in params]
        curves = mc.density_export(scenario, stats, replicates, seed, threads)
        return FigureReproduction(name, title, curves, params, replicates, seed)
    return build


FIGURES: dict[str, tuple[int, Callable]] = {
    "fig1": (20000, _figure("fig1", "Null densities, n = 200",
                            mc.SimulationScenario(mc.SINGLE, 200), _FIG1)),
    "fig2": (20000, _figure("fig2", "Null densities of the HANOVA statistic, a = 500, n = 3",
                            mc.SimulationScenario(mc.HANOVA, 3, 500), _FIG2)),
}

DEFAULT_REPLICATES = {name: entry[0] for name, entry in {**REPRODUCTIONS, **FIGURES}.items()}


def reproduce(name: str, replicates: int | None = None, seed: int = 0,
              threads: int | None = None) -> Reproduction | FigureReproduction:
    """Run one table or figure at ``replicates`` (default: the published count)."""
    registry = {**REPRODUCTIONS, **FIGURES}
    if name not in registry:
        raise KeyError(f"unknown reproduction {name!r}; choose from {', '.join(registry)}")
    default, build = registry[name]
    return build(default if replicates is None else replicates, seed, threads)
