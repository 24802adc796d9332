"""Seed-deterministic Monte Carlo engine for level and power studies.

Every replicate draws its normals from its own Philox stream keyed by the
seed and addressed by the replicate index, so a study's output depends only
on ``(scenario, statistics, replicates, seed)`` and never on how replicates
are split across worker threads.  Replicates are evaluated in vectorized
chunks and tallied as integers.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import calibration, special
from .errors import DomainError
from .hanova import null_variance
from .single import chisq_moment_match, storey_k_hat_rows

__all__ = [
    "SINGLE",
    "HANOVA",
    "Statistic",
    "SimulationScenario",
    "EtaFamily",
    "StudyRow",
    "StudyResult",
    "DensityCurve",
    "normal_variate_stream",
    "scenario_catalog",
    "simulate",
    "standardized_samples",
    "run_type1_study",
    "run_power_study",
    "density_export",
    "silverman_bandwidth",
    "gaussian_kde",
]

SINGLE = "single"
HANOVA = "hanova"

_MASK64 = (1 << 64) - 1


@lru_cache(maxsize=32)
def _philox_key(seed: int) -> tuple[int, int]:
    state = np.random.SeedSequence(seed).generate_state(2, dtype=np.uint64)
    return int(state[0]), int(state[1])


def _key_array(seed: int) -> np.ndarray:
    return np.array(_philox_key(seed), dtype=np.uint64)


def normal_variate_stream(seed: int, replicate_index: int) -> np.random.Generator:
    """Standard-normal generator for one replicate.

    The seed is hashed into a Philox key and the replicate index becomes the
    block counter, so streams are independent of each other and of the order
    in which they are created.
    """
    if seed < 0 or replicate_index < 0:
        raise DomainError("seed and replicate index must be non-negative")
    counter = [0, 0, replicate_index & _MASK64, (replicate_index >> 64) & _MASK64]
    bitgen = np.random.Philox(counter=counter, key=_key_array(seed))
    return np.random.Generator(bitgen)


# --------------------------------------------------------------------------
# statistics


_PARAM_KIND = {
    "order": "k",
    "order-chisq": "k",
    "hard": "delta",
    "hard-asym": "delta",
    "simes": None,
    "chisq": None,
    "order-dd": None,
    "order-chisq-dd": None,
    "hanova-order": "k",
    "hanova-order-r1": "k",
    "hanova-order-dd": None,
    "hanova-order-dd-r1": None,
    "f": None,
}
_SINGLE_ONLY = {"order", "order-chisq", "hard", "hard-asym", "chisq", "order-dd", "order-chisq-dd"}
_HANOVA_ONLY = {"hanova-order", "hanova-order-r1", "hanova-order-dd", "hanova-order-dd-r1", "f"}
_HANOVA_ALIAS = {"order": "hanova-order", "order-dd": "hanova-order-dd"}


@dataclass(frozen=True)
class Statistic:
    """A statistic to tally, e.g. ``Statistic("order", 22)``.

    ``hard-asym`` is the hard threshold statistic with the asymptotic
    centering and scaling.  ``order-dd`` and ``hanova-order-dd`` pick ``k``
    per replicate with the Storey-type estimate; ``simes`` uses the
    power-enhanced level with the scenario's true number of nonzero means.
    The ``-r1`` HANOVA variants use the ``"r1"`` null variance of
    :func:`orderthresh.hanova.null_variance` instead of the plug-in one.
    """

    name: str
    param: float | None = None

    def __post_init__(self):
        if self.name not in _PARAM_KIND:
            raise DomainError(f"unknown statistic {self.name!r}")
        kind = _PARAM_KIND[self.name]
        if kind is None and self.param is not None:
            raise DomainError(f"statistic {self.name!r} takes no parameter")
        if kind is not None:
            if self.param is None:
                raise DomainError(f"statistic {self.name!r} needs a parameter")
            if kind == "k" and (int(self.param) != self.param or self.param < 1):
                raise DomainError(f"k must be a positive integer, got {self.param}")
            if kind == "delta" and not self.param > 0:
                raise DomainError(f"delta must be > 0, got {self.param}")
            if kind == "k":
                object.__setattr__(self, "param", int(self.param))
            else:
                object.__setattr__(self, "param", float(self.param))

    @classmethod
    def parse(cls, text: str) -> "Statistic":
        """``"order:22"``, ``"hard:5.1216"``, ``"simes"`` ..."""
        name, _, param = str(text).strip().partition(":")
        if not param:
            return cls(name)
        try:
            value = float(param)
        except ValueError:
            raise DomainError(f"bad parameter in statistic {text!r}") from None
        return cls(name, value)

    @property
    def parameter_label(self) -> str:
        if self.param is None:
            return "khat" if "-dd" in self.name else ""
        if isinstance(self.param, int):
            return str(self.param)
        return f"{self.param:.6g}"

    def __str__(self) -> str:
        return self.name if self.param is None else f"{self.name}:{self.parameter_label}"


def _as_statistic(s) -> Statistic:
    return s if isinstance(s, Statistic) else Statistic.parse(s)


# --------------------------------------------------------------------------
# scenarios


@dataclass(frozen=True)
class SimulationScenario:
    """One data-generating setting.

    ``SINGLE``: ``X_j ~ N(theta_j, 1)``, j = 1..n.  ``HANOVA``: ``a`` groups of
    ``n`` normals with group means ``theta_i``.  Under ``H_r`` the means are
    ``theta_j = eta_{j+r-1}``, with ``eta`` zero beyond its printed support.
    """

    kind: str
    n: int
    a: int | None = None
    eta: tuple[float, ...] = ()
    shift_r: int = 1
    label: str | None = None
    noise: str = "std_normal"

    def __post_init__(self):
        if self.kind not in (SINGLE, HANOVA):
            raise DomainError(f"kind must be {SINGLE!r} or {HANOVA!r}, got {self.kind!r}")
        if self.kind == HANOVA and (self.a is None or self.a < 2 or self.n < 2):
            raise DomainError("hanova scenarios need a >= 2 groups of size n >= 2")
        if self.kind == SINGLE and self.n < 2:
            raise DomainError("single-sequence scenarios need n >= 2")
        if self.noise != "std_normal":
            raise DomainError(f"unsupported noise {self.noise!r}")
        object.__setattr__(self, "eta", tuple(float(e) for e in self.eta))
        if not 1 <= self.shift_r <= len(self.eta) + 1:
            raise DomainError(f"shift_r must lie in [1, {len(self.eta) + 1}], got {self.shift_r}")
        if len(self.eta) - self.shift_r + 1 > self.dim:
            raise DomainError("eta support does not fit in the mean vector")

    @property
    def dim(self) -> int:
        """Length of the mean vector (n, or the number of groups)."""
        return self.n if self.kind == SINGLE else self.a

    @property
    def draws(self) -> int:
        return self.n if self.kind == SINGLE else self.a * self.n

    def theta(self) -> np.ndarray:
        theta = np.zeros(self.dim)
        window = self.eta[self.shift_r - 1:]
        theta[: len(window)] = window
        return theta

    @property
    def k_opt(self) -> int:
        return int(np.count_nonzero(self.theta()))

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.kind == SINGLE:
            return f"n={self.n}" if not self.eta else f"n={self.n},H{self.shift_r}"
        base = f"a={self.a},n={self.n}"
        return base if not self.eta else f"{base},H{self.shift_r}"


@dataclass(frozen=True)
class EtaFamily:
    """A sequence of alternatives ``H_1, H_2, ...`` sharing one ``eta``."""

    name: str
    kind: str
    n: int
    eta: tuple[float, ...]
    a: int | None = None

    def scenario(self, r: int) -> SimulationScenario:
        label = "H0G" if r == len(self.eta) + 1 else f"H{r}"
        return SimulationScenario(self.kind, self.n, self.a, self.eta, r, label)

    def scenarios(self, shifts: Iterable[int] | None = None) -> list[SimulationScenario]:
        shifts = range(1, len(self.eta) + 1) if shifts is None else shifts
        return [self.scenario(r) for r in shifts]


_ETA_EX31 = (
    1.0674, -0.1656, 1.6253, 1.7877, 0.3535, 2.6909, 2.6892,
    1.4624, 1.8273, 1.6746, 1.3133, 2.2258, 0.9117, 3.6832,
    1.3636, 1.6139, 2.5668, 1.5593, 1.4044, 0.6677, 1.7944, 0.1638,
    2.2143, 3.1236, 0.8082, 2.7540, -0.0937, 0.0590, 2.0711, 2.3579,
)
_ETA_EX32 = (
    0.0512, 1.4647, 0.4995, 0.7216, 0.1151, 0.2716, 0.7842,
    3.7876, 0.1967, 0.8103, 0.4854, 0.2332, 0.5814, 0.3035,
    1.7357, 0.9021, 0.0667, 0.0867, 0.8909, 0.1124, 2.8491, 1.0416,
    0.2068, 2.6191, 1.9740, 1.5957, 1.6158, 0.5045, 1.3012, 1.6153,
)
_ETA_EX33 = (2.0,) * 30
_ETA_EX41 = (
    1.8005, -1.0754, 0.4274, -0.0561, 1.5652, 1.0484,
    -0.1741, -1.9260, 1.2856, -0.2212, 0.4617, 1.1677, 1.6873,
    0.9528, -1.2949, -0.3772, 1.7419, 1.6676, -0.3589, 1.5746,
)
_ETA_EX42 = (
    1.0949, 0.5511, 1.7587, 0.1128, 0.4033, 0.7991, 0.6868,
    0.0993, 0.6919, 1.8255, 1.1272, 2.1041, 0.3975,
    1.4730, 0.4549, 1.5015, 0.1830, 0.6865, 0.1360, 2.1458,
)


def scenario_catalog() -> dict[str, EtaFamily]:
    """Built-in alternative sequences plus the two null settings."""
    return {
        "ex3.1": EtaFamily("ex3.1", SINGLE, 500, _ETA_EX31),
        "ex3.2": EtaFamily("ex3.2", SINGLE, 500, _ETA_EX32),
        "ex3.3": EtaFamily("ex3.3", SINGLE, 500, _ETA_EX33),
        "ex4.1": EtaFamily("ex4.1", HANOVA, 5, _ETA_EX41, a=1000),
        "ex4.2": EtaFamily("ex4.2", HANOVA, 5, _ETA_EX42, a=1000),
        "null-single": EtaFamily("null-single", SINGLE, 500, ()),
        "null-hanova": EtaFamily("null-hanova", HANOVA, 5, (), a=1000),
    }


# --------------------------------------------------------------------------
# vectorized evaluation


def _simes_cutoffs(dim: int, alpha: float, k_opt: int) -> np.ndarray:
    """``c_i`` with ``|x|_(i) > c_i  <=>  dim * P_(i) / i < level`` (two-sided p-values)."""
    level = alpha / (1.0 - k_opt / dim)
    out = np.empty(dim)
    for i in range(1, dim + 1):
        q = level * i / dim
        out[i - 1] = -math.inf if q >= 1.0 else special.std_normal_isf(q / 2.0)
    return out


class _Evaluator:
    """Scores and critical values for a batch of replicates.

    ``scores(x)`` returns ``(score, crit)`` arrays of shape (m, s); a
    replicate rejects for statistic j when ``score[:, j] > crit[:, j]``.
    ``score`` is the standardized statistic where one exists.
    """

    def __init__(self, scenario: SimulationScenario, statistics: Sequence[Statistic], alpha: float):
        self.scenario = scenario
        self.alpha = alpha
        self.dim = scenario.dim
        self.stats = [self._normalize(s) for s in statistics]
        self.z_crit = special.std_normal_isf(alpha)
        self._prepared = [self._prepare(s) for s in self.stats]

    def _normalize(self, s: Statistic) -> Statistic:
        if self.scenario.kind == HANOVA and s.name in _HANOVA_ALIAS:
            s = Statistic(_HANOVA_ALIAS[s.name], s.param)
        allowed_out = _HANOVA_ONLY if self.scenario.kind == SINGLE else _SINGLE_ONLY
        if s.name in allowed_out:
            raise DomainError(f"statistic {s.name!r} does not apply to {self.scenario.kind} data")
        if _PARAM_KIND[s.name] == "k" and s.param > self.dim:
            raise DomainError(f"k={s.param} exceeds dimension {self.dim}")
        return s

    def _prepare(self, s: Statistic) -> dict:
        d, alpha = self.dim, self.alpha
        if s.name in ("order", "hanova-order", "hanova-order-r1"):
            t = calibration.calibration_table(d, s.param)
            prep = {"mu": t.mu, "sd": t.sigma}
            if s.name.startswith("hanova"):
                method = "r1" if s.name.endswith("-r1") else "plugin"
                prep["scale"] = math.sqrt(null_variance(d, s.param, self.scenario.n, method))
            return prep
        if s.name == "order-chisq":
            t = calibration.calibration_table(d, s.param)
            b, nu = chisq_moment_match(d, s.param)
            crit_raw = b * special.chisq_isf(alpha, nu)
            return {"mu": t.mu, "sd": t.sigma, "crit": (crit_raw - d * t.mu) / (math.sqrt(d) * t.sigma)}
        if s.name in ("hard", "hard-asym"):
            method = "asymptotic" if s.name == "hard-asym" else "exact"
            return {"m": calibration.hard_moments(d, s.param, method)}
        if s.name == "simes":
            return {"cut": _simes_cutoffs(d, alpha, self.scenario.k_opt)}
        if s.name == "chisq":
            return {"crit": (special.chisq_isf(alpha, d) - d) / math.sqrt(2.0 * d)}
        if "-dd" in s.name:
            mu, sigma2 = calibration.order_moments_all(d)
            prep = {"mu": mu, "sd": np.sqrt(sigma2)}
            n = self.scenario.n
            if s.name == "order-chisq-dd":
                prep["crit"] = _chisq_dd_crits(d, alpha)
            elif s.name == "hanova-order-dd":
                prep["scale"] = np.sqrt(1.0 + 2.0 * mu * mu / (sigma2 * (n - 1)))
            elif s.name == "hanova-order-dd-r1":
                prep["scale"] = np.full(d, math.sqrt(1.0 + 1.0 / (n - 1)))
            return prep
        if s.name == "f":
            a, n = self.scenario.a, self.scenario.n
            return {"crit": special.f_isf(alpha, a - 1, a * (n - 1))}
        raise AssertionError(s.name)

    def effects(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
        """Per-row effects whose squares feed the statistics, plus F for HANOVA."""
        if self.scenario.kind == SINGLE:
            return x, None
        a, n = self.scenario.a, self.scenario.n
        means = x.mean(axis=2)
        grand = means.mean(axis=1, keepdims=True)
        sse = np.sum((x - means[:, :, None]) ** 2, axis=(1, 2))
        mse = sse / (a * (n - 1))
        dev = means - grand
        z = math.sqrt(n) * dev / np.sqrt(mse)[:, None]
        f = n * np.sum(dev * dev, axis=1) / (a - 1) / mse
        return z, f

    def scores(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        z, f = self.effects(x)
        m, d = z.shape
        y = z * z
        y_desc = -np.sort(-y, axis=1)
        csum = np.cumsum(y_desc, axis=1)
        k_hat = None
        if any("-dd" in s.name for s in self.stats):
            p = np.minimum(2.0 * special.std_normal_sf_array(np.abs(z)), 1.0)
            k_hat = storey_k_hat_rows(p)
        score = np.empty((m, len(self.stats)))
        crit = np.empty_like(score)
        rows = np.arange(m)
        sqrt_d = math.sqrt(d)
        for j, (s, prep) in enumerate(zip(self.stats, self._prepared)):
            name = s.name
            if name in ("order", "order-chisq", "hanova-order", "hanova-order-r1"):
                std = (csum[:, s.param - 1] - d * prep["mu"]) / (sqrt_d * prep["sd"])
                if "scale" in prep:
                    std = std / prep["scale"]
                score[:, j] = std
                crit[:, j] = prep.get("crit", self.z_crit)
            elif "-dd" in name:
                idx = k_hat - 1
                std = (csum[rows, idx] - d * prep["mu"][idx]) / (sqrt_d * prep["sd"][idx])
                if "scale" in prep:
                    std = std / prep["scale"][idx]
                score[:, j] = std
                crit[:, j] = prep["crit"][idx] if name == "order-chisq-dd" else self.z_crit
            elif name in ("hard", "hard-asym"):
                mom = prep["m"]
                total = np.where(y > mom.delta, y, 0.0).sum(axis=1)
                score[:, j] = (total - mom.mean_total) / math.sqrt(mom.var_total)
                crit[:, j] = self.z_crit
            elif name == "simes":
                score[:, j] = np.max(np.sqrt(y_desc) - prep["cut"], axis=1)
                crit[:, j] = 0.0
            elif name == "chisq":
                score[:, j] = (csum[:, -1] - d) / math.sqrt(2.0 * d)
                crit[:, j] = prep["crit"]
            elif name == "f":
                score[:, j] = f
                crit[:, j] = prep["crit"]
        return score, crit


@lru_cache(maxsize=8)
def _chisq_dd_crits(d: int, alpha: float) -> np.ndarray:
    """Standardized scaled-chi-square critical values for every k (used by ``order-chisq-dd``).

    Only ``k >= log(d)^{3/2}`` can be selected, so smaller k are left at +inf.
    """
    mu, sigma2 = calibration.order_moments_all(d)
    out = np.full(d, math.inf)
    k_min = max(1, int(math.floor(math.log(d) ** 1.5 + 0.5)))
    for k in range(k_min, d + 1):
        m, s2 = mu[k - 1], sigma2[k - 1]
        b, nu = s2 / (2.0 * m), 2.0 * d * m * m / s2
        out[k - 1] = (b * special.chisq_isf(alpha, nu) - d * m) / (math.sqrt(d) * math.sqrt(s2))
    out.setflags(write=False)
    return out


def _draw(scenario: SimulationScenario, seed: int, lo: int, hi: int) -> np.ndarray:
    m, width = hi - lo, scenario.draws
    out = np.empty((m, width))
    key = _key_array(seed)
    for row, idx in enumerate(range(lo, hi)):
        counter = [0, 0, idx & _MASK64, (idx >> 64) & _MASK64]
        gen = np.random.Generator(np.random.Philox(counter=counter, key=key))
        gen.standard_normal(out=out[row])
    theta = scenario.theta()
    if scenario.kind == SINGLE:
        if scenario.eta:
            out += theta
        return out
    out = out.reshape(m, scenario.a, scenario.n)
    if scenario.eta:
        out += theta[None, :, None]
    return out


def _chunks(replicates: int, draws: int) -> list[tuple[int, int]]:
    # roughly 2 million doubles per chunk keeps memory modest and numpy busy
    size = max(16, min(4096, 2_000_000 // max(draws, 1)))
    return [(lo, min(lo + size, replicates)) for lo in range(0, replicates, size)]


def _workers(threads: int | None) -> int:
    if threads is None:
        return os.cpu_count() or 1
    if threads < 1:
        raise DomainError(f"threads must be >= 1, got {threads}")
    return int(threads)


def _map_chunks(fn, replicates: int, draws: int, threads: int | None) -> list:
    chunks = _chunks(replicates, draws)
    workers = min(_workers(threads), len(chunks))
    if workers <= 1:
        return [fn(lo, hi) for lo, hi in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: fn(*c), chunks))


def _check_common(replicates: int, seed: int, alpha: float, minimum: int = 100) -> None:
    if isinstance(replicates, bool) or int(replicates) != replicates or replicates < minimum:
        raise DomainError(f"replicates must be an integer >= {minimum}, got {replicates}")
    if int(seed) != seed or seed < 0:
        raise DomainError(f"seed must be a non-negative integer, got {seed}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def simulate(scenario: SimulationScenario, statistics, replicates: int, seed: int,
             alpha: float = 0.05, threads: int | None = None) -> np.ndarray:
    """Rejection counts, one per statistic, over replicates ``0..replicates-1``."""
    _check_common(replicates, seed, alpha, minimum=1)
    ev = _Evaluator(scenario, [_as_statistic(s) for s in statistics], alpha)

    def work(lo, hi):
        score, crit = ev.scores(_draw(scenario, seed, lo, hi))
        return np.count_nonzero(score > crit, axis=0)

    parts = _map_chunks(work, replicates, scenario.draws, threads)
    return np.sum(parts, axis=0)


def standardized_samples(scenario: SimulationScenario, statistic, replicates: int, seed: int,
                         threads: int | None = None) -> np.ndarray:
    """Standardized statistic per replicate, in replicate order.

    HANOVA order statistics are divided by the square root of their null
    variance, so every returned sample has an approximate N(0, 1) null.
    """
    s = _as_statistic(statistic)
    _check_common(replicates, seed, 0.05, minimum=1)
    ev = _Evaluator(scenario, [s], 0.05)
    if ev.stats[0].name in ("simes", "f"):
        raise DomainError(f"statistic {s.name!r} has no standardized form")

    def work(lo, hi):
        score, _ = ev.scores(_draw(scenario, seed, lo, hi))
        return score[:, 0]

    return np.concatenate(_map_chunks(work, replicates, scenario.draws, threads))


# --------------------------------------------------------------------------
# studies


@dataclass(frozen=True)
class StudyRow:
    scenario: str
    statistic: str
    parameter: str
    rate: float
    replicates: int
    seed: int
    k_opt: int = 0

    @property
    def se(self) -> float:
        return math.sqrt(self.rate * (1.0 - self.rate) / self.replicates)


def _g6(x: float) -> str:
    return f"{x:.6g}"


@dataclass
class StudyResult:
    rows: list[StudyRow] = field(default_factory=list)

    CSV_COLUMNS = ("scenario", "statistic", "parameter", "rate", "replicates", "se")

    def rate(self, scenario: str, statistic) -> float:
        s = _as_statistic(statistic)
        for row in self.rows:
            if row.scenario == scenario and row.statistic == s.name and row.parameter == s.parameter_label:
                return row.rate
        raise KeyError((scenario, str(s)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.scenario, r.statistic, r.parameter, _g6(r.rate), r.replicates, _g6(r.se)])
        return buf.getvalue()


def _study(scenarios: Sequence[SimulationScenario], statistics, replicates, seed, alpha, threads):
    _check_common(replicates, seed, alpha)
    stats = [_as_statistic(s) for s in statistics]
    rows = []
    for sc in scenarios:
        counts = simulate(sc, stats, replicates, seed, alpha, threads)
        for s, c in zip(stats, counts):
            name = _HANOVA_ALIAS.get(s.name, s.name) if sc.kind == HANOVA else s.name
            rows.append(StudyRow(sc.name, name, s.parameter_label, int(c) / replicates,
                                 replicates, seed, sc.k_opt))
    return StudyResult(rows)


def _null_scenario(dims) -> SimulationScenario:
    if isinstance(dims, SimulationScenario):
        return dims
    if isinstance(dims, (int, np.integer)):
        return SimulationScenario(SINGLE, int(dims))
    a, n = dims
    return SimulationScenario(HANOVA, int(n), int(a))


def run_type1_study(dims, statistics, replicates: int, seed: int, alpha: float = 0.05,
                    threads: int | None = None) -> StudyResult:
    """Null rejection rates.

    ``dims`` is ``n``, ``(a, n)``, or a list of either.  Every dimension uses
    the same replicate streams.
    """
    if isinstance(dims, list):
        scenarios = [_null_scenario(d) for d in dims]
    else:
        scenarios = [_null_scenario(dims)]
    return _study(scenarios, statistics, replicates, seed, alpha, threads)


def run_power_study(family: EtaFamily | str, statistics, replicates: int, seed: int,
                    shifts: Iterable[int] | None = None, alpha: float = 0.05,
                    threads: int | None = None) -> StudyResult:
    """Rejection rates under ``H_r`` for each shift ``r`` (default ``1..len(eta)``)."""
    if isinstance(family, str):
        catalog = scenario_catalog()
        if family not in catalog:
            raise DomainError(f"unknown scenario family {family!r}")
        family = catalog[family]
    return _study(family.scenarios(shifts), statistics, replicates, seed, alpha, threads)


# --------------------------------------------------------------------------
# densities


def silverman_bandwidth(samples: np.ndarray) -> float:
    x = np.asarray(samples, dtype=float)
    sd = float(np.std(x, ddof=1))
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34)
    if not spread > 0.0:
        spread = sd
    if not spread > 0.0:
        raise DomainError("samples have zero spread")
    return 0.9 * spread * x.size ** (-0.2)


def gaussian_kde(samples, grid_size: int = 512) -> tuple[np.ndarray, np.ndarray, float]:
    """Gaussian KDE on ``grid_size`` points over ``[min - 3h, max + 3h]``; returns (x, f, h)."""
    x = np.asarray(samples, dtype=float)
    h = silverman_bandwidth(x)
    grid = np.linspace(x.min() - 3.0 * h, x.max() + 3.0 * h, grid_size)
    dens = np.zeros(grid_size)
    for lo in range(0, x.size, 2048):
        u = (grid[:, None] - x[None, lo:lo + 2048]) / h
        dens += np.exp(-0.5 * u * u).sum(axis=1)
    dens /= x.size * h * math.sqrt(2.0 * math.pi)
    return grid, dens, h


@dataclass(frozen=True)
class DensityCurve:
    statistic: str
    parameter: str
    x: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)
    reference: np.ndarray = field(repr=False)
    bandwidth: float = 0.0


def density_export(scenario: SimulationScenario | int | tuple, statistics, replicates: int,
                   seed: int, threads: int | None = None) -> list[DensityCurve]:
    """KDE of each standardized statistic over null replicates, with the N(0,1) curve."""
    if isinstance(replicates, bool) or int(replicates) != replicates or replicates < 1000:
        raise DomainError(f"replicates must be an integer >= 1000, got {replicates}")
    scenario = _null_scenario(scenario)
    curves = []
    for s in statistics:
        s = _as_statistic(s)
        sample = standardized_samples(scenario, s, replicates, seed, threads)
        x, f, h = gaussian_kde(sample)
        ref = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        curves.append(DensityCurve(s.name, s.parameter_label, x, f, ref, h))
    return curves
