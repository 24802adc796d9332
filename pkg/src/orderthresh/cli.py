"""Command-line entry point: ``orderthresh {calibrate,test,hanova,simulate,reproduce}``.

Exit status is 0 on success, 2 for usage or input errors (bad flags, files
that do not parse, invalid configs) and 1 when a computation rejects its
arguments (for example a degenerate HANOVA layout).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

from . import calibration, hanova, montecarlo as mc, single, tables
from .errors import DegenerateDataError, DomainError, UnsupportedDesignError

__all__ = ["main", "parse_and_dispatch", "format_calibration", "parse_calibration", "UsageError"]

SEED_ENV = "ORDER_THRESH_SEED"


class UsageError(Exception):
    """Invalid invocation or unreadable input; exit status 2."""


def _g6(x) -> str:
    return f"{x:.6g}"


# --------------------------------------------------------------------------
# input parsing


def _read_text(path: str | None) -> str:
    if path is None or path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _parse_float(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise UsageError(f"line {lineno}: not a number: {token.strip()!r}") from None
    if not math.isfinite(value):
        raise UsageError(f"line {lineno}: non-finite value {token.strip()!r}")
    return value


def parse_values(text: str) -> list[float]:
    """One number per line; blank lines ignored."""
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            out.append(_parse_float(line.strip(), lineno))
    if not out:
        raise UsageError("no observations in input")
    return out


def parse_rows(text: str) -> list[list[float]]:
    """Comma-separated rows, one group per row; blank lines ignored."""
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            rows.append([_parse_float(tok, lineno) for tok in line.split(",")])
    if not rows:
        raise UsageError("no groups in input")
    return rows


def _seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return 0
    try:
        seed = int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    if seed < 0:
        raise UsageError(f"{SEED_ENV} must be non-negative, got {seed}")
    return seed


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text)


# --------------------------------------------------------------------------
# calibrate


def format_calibration(table: calibration.CalibrationTable) -> str:
    """``n,k,mu,sigma2`` header and values, then ``i,nu_tilde,alpha`` rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("n", "k", "mu", "sigma2"))
    w.writerow((table.n, table.k, _g6(table.mu), _g6(table.sigma2)))
    w.writerow(("i", "nu_tilde", "alpha"))
    for i, (nu, a) in enumerate(zip(table.nu_tilde, table.alpha), start=1):
        w.writerow((i, _g6(nu), _g6(a)))
    return buf.getvalue()


def parse_calibration(text: str) -> dict:
    """Inverse of :func:`format_calibration` (values as printed)."""
    lines = list(csv.reader(io.StringIO(text)))
    if len(lines) < 3 or lines[0] != ["n", "k", "mu", "sigma2"] or lines[2] != ["i", "nu_tilde", "alpha"]:
        raise UsageError("not a calibration table")
    n, k = int(lines[1][0]), int(lines[1][1])
    body = lines[3:]
    if len(body) != n:
        raise UsageError(f"expected {n} rows, found {len(body)}")
    return {
        "n": n,
        "k": k,
        "mu": float(lines[1][2]),
        "sigma2": float(lines[1][3]),
        "nu_tilde": [float(r[1]) for r in body],
        "alpha": [float(r[2]) for r in body],
    }


def _cmd_calibrate(args) -> int:
    table = calibration.calibration_table(args.n, args.k)
    _write(format_calibration(table), args.output)
    return 0


# --------------------------------------------------------------------------
# test / hanova


def _emit_json(record: dict, path: str | None) -> None:
    _write(json.dumps(record) + "\n", path)


def _cmd_test(args) -> int:
    values = parse_values(_read_text(args.input))
    stat = args.stat
    needs_k = stat in ("order", "order-chisq", "exp-order")
    if args.k_data_driven and stat not in ("order", "order-chisq"):
        raise UsageError("--k-data-driven applies to --stat order and order-chisq only")
    if needs_k and args.k is None and not args.k_data_driven:
        raise UsageError(f"--stat {stat} needs --k or --k-data-driven")
    if args.k is not None and args.k_data_driven:
        raise UsageError("--k and --k-data-driven are mutually exclusive")
    if stat == "simes":
        p = values if args.pvalues else single.pvalues_from_normals(values)
        outcome = single.simes_test(p, args.alpha, args.k_opt)
    elif stat == "exp-order":
        outcome = single.exp_order_threshold_test(values, args.k, args.alpha)
    else:
        x = single.ObservationVector(values)
        if stat in ("order", "order-chisq"):
            k = single.data_driven_k(x) if args.k_data_driven else args.k
            fn = single.order_threshold_test if stat == "order" else single.order_threshold_test_chisq
            outcome = fn(x, k, args.alpha)
        elif stat == "hard":
            delta = args.delta if args.delta is not None else calibration.recommended_delta(len(x))
            outcome = single.hard_threshold_test(x, delta, args.alpha, args.hard_method)
        else:
            outcome = single.chisq_test(x, args.alpha)
    _emit_json(outcome.to_dict(), args.output)
    return 0


def _cmd_hanova(args) -> int:
    g = hanova.summarize(parse_rows(_read_text(args.input)))
    if args.stat == "f":
        outcome = hanova.f_test(g, args.alpha)
    else:
        if args.k is not None and args.k_data_driven:
            raise UsageError("--k and --k-data-driven are mutually exclusive")
        if args.k is None and not args.k_data_driven:
            raise UsageError("--stat order needs --k or --k-data-driven")
        k = hanova.hanova_storey_k(g) if args.k_data_driven else args.k
        outcome = hanova.hanova_order_test(g, k, args.alpha, args.variance)
    _emit_json(outcome.to_dict(), args.output)
    return 0


# --------------------------------------------------------------------------
# simulate


_CONFIG_KEYS = {"kind", "dims", "statistics", "replicates", "seed", "output", "alpha",
                "family", "eta", "shifts"}


def _load_config(path: str) -> dict:
    try:
        config = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: line {exc.lineno}: {exc.msg}") from None
    if not isinstance(config, dict):
        raise UsageError("config must be a JSON object")
    unknown = set(config) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return config


def _config_dims(kind: str, dims):
    def one(d):
        if kind == mc.SINGLE:
            if isinstance(d, bool) or not isinstance(d, int):
                raise UsageError(f"single dims must be integers, got {d!r}")
            return d
        if (not isinstance(d, (list, tuple)) or len(d) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in d)):
            raise UsageError(f"hanova dims must be [a, n] pairs, got {d!r}")
        return tuple(d)

    if kind == mc.SINGLE:
        return [one(d) for d in dims] if isinstance(dims, list) else [one(dims)]
    if isinstance(dims, list) and dims and isinstance(dims[0], list):
        return [one(d) for d in dims]
    return [one(dims)]


def _run_config(config: dict, seed_override, threads) -> mc.StudyResult:
    for key in ("statistics", "replicates"):
        if key not in config:
            raise UsageError(f"config is missing {key!r}")
    stats = config["statistics"]
    if not isinstance(stats, list) or not stats:
        raise UsageError("statistics must be a non-empty list")
    try:
        stats = [mc.Statistic.parse(s) for s in stats]
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    replicates = config["replicates"]
    if isinstance(replicates, bool) or not isinstance(replicates, int):
        raise UsageError("replicates must be an integer")
    seed = seed_override if seed_override is not None else config.get("seed")
    seed = _seed(seed)
    alpha = float(config.get("alpha", 0.05))

    if "family" in config:
        catalog = mc.scenario_catalog()
        if config["family"] not in catalog:
            raise UsageError(f"unknown family {config['family']!r}; choose from {', '.join(catalog)}")
        return mc.run_power_study(catalog[config["family"]], stats, replicates, seed,
                                  shifts=config.get("shifts"), alpha=alpha, threads=threads)
    kind = config.get("kind", mc.SINGLE)
    if kind not in (mc.SINGLE, mc.HANOVA):
        raise UsageError(f"kind must be {mc.SINGLE!r} or {mc.HANOVA!r}")
    if "dims" not in config:
        raise UsageError("config is missing 'dims'")
    dims = _config_dims(kind, config["dims"])
    if "eta" in config:
        if len(dims) != 1:
            raise UsageError("an eta sequence needs exactly one dims entry")
        d = dims[0]
        n, a = (d, None) if kind == mc.SINGLE else (d[1], d[0])
        family = mc.EtaFamily("custom", kind, n, tuple(config["eta"]), a)
        return mc.run_power_study(family, stats, replicates, seed,
                                  shifts=config.get("shifts"), alpha=alpha, threads=threads)
    return mc.run_type1_study(dims, stats, replicates, seed, alpha=alpha, threads=threads)


def _cmd_simulate(args) -> int:
    config = _load_config(args.config)
    result = _run_config(config, args.seed, args.threads)
    _write(result.to_csv(), args.output or config.get("output"))
    return 0


# --------------------------------------------------------------------------
# reproduce


def _cmd_reproduce(args) -> int:
    seed = _seed(args.seed)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rep = tables.reproduce(args.name, args.replicates, seed, args.threads)
    written = []
    for suffix, text in ((".csv", rep.to_csv()), ("_published.csv", rep.published_csv())):
        path = out / f"{args.name}{suffix}"
        path.write_text(text)
        written.append(path)
    if isinstance(rep, tables.Reproduction):
        path = out / f"{args.name}_long.csv"
        path.write_text(rep.long.to_csv())
        written.append(path)
    if not args.no_plot:
        from .plotting import plot_reproduction

        written.append(plot_reproduction(rep, out / f"{args.name}.png"))
    for path in written:
        print(path)
    if isinstance(rep, tables.Reproduction):
        print(f"max |reproduced - published| = {rep.max_abs_difference():.4f}")
    return 0


# --------------------------------------------------------------------------
# argument parsing


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orderthresh",
        description="Order thresholding tests, calibration constants and Monte Carlo reproduction.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("calibrate", help="print standardization constants for (n, k) as CSV")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--output", "-o", help="output file (default stdout)")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("test", help="run a single-sequence global test on one value per line")
    p.add_argument("input", nargs="?", help="input file (default stdin)")
    p.add_argument("--stat", choices=("order", "order-chisq", "hard", "simes", "chisq", "exp-order"),
                   default="order")
    p.add_argument("--k", type=_positive_int)
    p.add_argument("--k-data-driven", action="store_true", help="choose k with the Storey-type estimate")
    p.add_argument("--delta", type=float, help="hard threshold (default: recommended value for n)")
    p.add_argument("--hard-method", choices=calibration.HARD_METHODS, default="exact")
    p.add_argument("--k-opt", type=_nonneg_int, help="Simes power enhancement: assumed number of signals")
    p.add_argument("--pvalues", action="store_true", help="Simes only: input lines are p-values")
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--output", "-o")
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("hanova", help="HANOVA test on CSV input, one group per row")
    p.add_argument("input", nargs="?", help="input file (default stdin)")
    p.add_argument("--stat", choices=("order", "f"), default="order")
    p.add_argument("--k", type=_positive_int)
    p.add_argument("--k-data-driven", action="store_true")
    p.add_argument("--variance", choices=hanova.VARIANCE_METHODS, default="plugin")
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--output", "-o")
    p.set_defaults(func=_cmd_hanova)

    p = sub.add_parser("simulate", help="run a Monte Carlo study from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=_nonneg_int, help=f"overrides the config seed and ${SEED_ENV}")
    p.add_argument("--threads", type=_positive_int)
    p.add_argument("--output", "-o", help="overrides the config output path")
    p.set_defaults(func=_cmd_simulate)

    names = list(tables.REPRODUCTIONS) + list(tables.FIGURES)
    p = sub.add_parser("reproduce", help="regenerate a published table or figure")
    p.add_argument("name", choices=names)
    p.add_argument("--replicates", type=_positive_int, help="default: the published run count")
    p.add_argument("--seed", type=_nonneg_int)
    p.add_argument("--threads", type=_positive_int)
    p.add_argument("--output-dir", default=".")
    p.add_argument("--no-plot", action="store_true", help="skip the PNG rendering")
    p.set_defaults(func=_cmd_reproduce)
    return parser


def parse_and_dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"orderthresh {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, DegenerateDataError, UnsupportedDesignError) as exc:
        print(f"orderthresh {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
