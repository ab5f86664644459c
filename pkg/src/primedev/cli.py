"""Command-line front end.

Subcommands: ``rate``, ``simulate``, ``oracle``, ``counterexample``, ``verify``.
Exit codes: 0 success, 1 verification failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import checks
from .additive import (AdditiveFunctionSpec, Constant, counterexample_schedule, empirical_rho,
                       spec_from_json)
from .errors import CapacityError, DomainError, InfeasibleError, UnsupportedSpecError
from .measures import Atoms, LimitMeasure, measure_from_json
from .output import csv_text, svg_chart, write_atomic
from .primes import build_prime_table
from .ratefn import closed_form_for, legendre_rate
from .simulate import (exact_y_distribution, exact_z_distribution, moment_gap_bound_check, sample_y,
                       sample_z)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    """Configuration problem; the message names the offending field."""


@dataclass
class RunConfig:
    g: AdditiveFunctionSpec = field(default_factory=Constant)
    rho: LimitMeasure | None = None
    n: int | None = None
    Q: int | None = None
    C: float = math.inf
    samples: int = 10000
    seed: int = 0
    x_grid: tuple[float, float, float] = (0.0, 3.0, 0.5)
    model: str = "y"
    exact: bool = False
    r_max: int = 5
    params: dict = field(default_factory=dict)
    output_path: str | None = None
    output_format: str = "csv"


def _field(raw, name, conv):
    try:
        return conv(raw[name])
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"field '{name}': {exc}") from None


def _resolve_rho(obj) -> LimitMeasure:
    if isinstance(obj, dict) and obj.get("kind") == "empirical":
        g = spec_from_json(obj["g"])
        n = int(obj["n"])
        return Atoms.from_empirical(empirical_rho(g, build_prime_table(max(n, 2), with_spf=False), n))
    return measure_from_json(obj)


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a JSON object")
    cfg = RunConfig()
    if "g" in raw:
        try:
            cfg.g = spec_from_json(raw["g"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"field 'g': {exc}") from None
    if "rho" in raw:
        try:
            cfg.rho = _resolve_rho(raw["rho"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"field 'rho': {exc}") from None
    for name, conv in (("n", int), ("Q", int), ("samples", int), ("seed", int), ("r_max", int)):
        if name in raw:
            setattr(cfg, name, _field(raw, name, conv))
    if "C" in raw:
        cfg.C = math.inf if raw["C"] in (None, "inf") else _field(raw, "C", float)
    if "model" in raw:
        cfg.model = str(raw["model"]).lower()
        if cfg.model not in ("y", "z"):
            raise ConfigError(f"field 'model': expected 'y' or 'z', got {raw['model']!r}")
    if "exact" in raw:
        if not isinstance(raw["exact"], bool):
            raise ConfigError("field 'exact': expected true or false")
        cfg.exact = raw["exact"]
    if "x_grid" in raw:
        grid = raw["x_grid"]
        try:
            lo, hi, step = (float(v) for v in grid)
        except (TypeError, ValueError):
            raise ConfigError("field 'x_grid': expected [min, max, step]") from None
        if not step > 0 or hi < lo:
            raise ConfigError("field 'x_grid': need step > 0 and max >= min")
        cfg.x_grid = (lo, hi, step)
    if "params" in raw:
        if not isinstance(raw["params"], dict):
            raise ConfigError("field 'params': expected an object")
        cfg.params = raw["params"]
    out = raw.get("output", {})
    if not isinstance(out, dict):
        raise ConfigError("field 'output': expected an object with 'path' and 'format'")
    cfg.output_path = out.get("path")
    cfg.output_format = out.get("format", "csv")
    return cfg


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(raw)


def x_values(grid) -> np.ndarray:
    lo, hi, step = grid
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def cmd_rate(cfg: RunConfig):
    """Rate function over the x grid: (header, rows, svg series)."""
    if cfg.rho is None:
        raise ConfigError("field 'rho': required for the rate command")
    cf = closed_form_for(cfg.rho) if math.isinf(cfg.C) else None
    header = ["x"] + (["I_closed_form"] if cf else []) + ["I_numeric", "theta_star"]
    rows, xs, num, closed = [], [], [], []
    for x in x_values(cfg.x_grid):
        x = float(x)
        res = legendre_rate(cfg.rho, x, cfg.C)
        row = [x]
        if cf:
            cv = cf.rate(x).value
            row.append(cv)
            closed.append(cv)
        row += [res.value, res.theta_star]
        rows.append(row)
        xs.append(x)
        num.append(res.value)
    series = {"I numeric": (xs, num)}
    if cf:
        series["I closed form"] = (xs, closed)
    return header, rows, series


def cmd_simulate(cfg: RunConfig):
    model = cfg.model
    size = cfg.Q if model == "y" else cfg.n
    if size is None:
        raise ConfigError(f"field '{'Q' if model == 'y' else 'n'}': required for model {model}")
    if cfg.exact:
        if model == "y":
            dist = exact_y_distribution(size, cfg.g, cfg.C)
        else:
            dist = exact_z_distribution(size, cfg.g)
        rows = [[float(v), float(p)] for v, p in zip(dist.values, dist.probs)]
        return ["value", "prob"], rows, {"probability": (dist.values, dist.probs)}
    if model == "y":
        batch = sample_y(size, cfg.g, cfg.samples, cfg.seed)
    else:
        batch = sample_z(size, cfg.g, cfg.samples, cfg.seed)
    rows = [[i, float(v)] for i, v in enumerate(batch.values)]
    vals, counts = np.unique(batch.values, return_counts=True)
    return ["index", "value"], rows, {"frequency": (vals, counts / len(batch.values))}


def cmd_oracle(cfg: RunConfig):
    n = cfg.n if cfg.n is not None else 10**5
    Q = cfg.Q if cfg.Q is not None else 50
    C = cfg.C if math.isfinite(cfg.C) else 1.0
    rows = moment_gap_bound_check(n, Q, C, cfg.r_max, cfg.g)
    out = [[r.r, float(r.z_moment), float(r.y_moment), float(r.gap), float(r.bound), r.passed] for r in rows]
    series = {"gap": ([r.r for r in rows], [float(r.gap) for r in rows]),
              "bound": ([r.r for r in rows], [float(r.bound) for r in rows])}
    return ["r", "E_S_r", "E_Stilde_r", "gap", "bound", "pass"], out, series, all(r.passed for r in rows)


def cmd_counterexample(cfg: RunConfig):
    p = cfg.params
    args = {}
    for name, default, conv in (("lambda1", 1.0, float), ("lambda2", 2.0, float), ("delta", 0.1, float),
                                ("theta", 1.0, float), ("K", 6, int)):
        try:
            args[name] = conv(p.get(name, default))
        except (TypeError, ValueError):
            raise ConfigError(f"field 'params.{name}': expected a number, got {p.get(name)!r}") from None
    sched = counterexample_schedule(args["lambda1"], args["lambda2"], args["delta"], args["theta"], K=args["K"])
    ok = sched.satisfied()
    rows = []
    for k, (u, c, good) in enumerate(zip(sched.breakpoints, sched.cumulants, ok), start=1):
        side = "low" if k % 2 else "high"
        level = sched.low_level + sched.delta if k % 2 else sched.high_level - sched.delta
        rows.append([k, float(u), float(c), side, float(level), bool(good)])
    series = {"normalized cumulant": (np.log(sched.breakpoints), sched.cumulants)}
    return ["k", "u", "cumulant", "side", "threshold", "pass"], rows, series, bool(np.all(ok))


def _emit(text: str, path: str | None):
    if path:
        write_atomic(path, text)
    else:
        sys.stdout.write(text)


def _render(fmt_, header, rows, series, title):
    if fmt_ == "svg":
        return svg_chart(series, title=title, xlabel=header[0], ylabel=header[-1] if len(header) > 1 else "")
    return csv_text(header, rows)


def _threads():
    raw = os.environ.get("LDP_ARITH_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"LDP_ARITH_THREADS: expected a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"LDP_ARITH_THREADS: expected a positive integer, got {raw!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="primedev", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False):
        p.add_argument("--config", metavar="PATH", help="JSON run configuration")
        p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "svg"), help="output format")
        if seed:
            p.add_argument("--seed", type=int, help="RNG seed (overrides the config)")

    common(sub.add_parser("rate", help="rate function table over an x grid"))
    common(sub.add_parser("simulate", help="samples or exact law of the Y or Z model"), seed=True)
    common(sub.add_parser("oracle", help="exact moment comparison of the Z and Y models"))
    common(sub.add_parser("counterexample", help="oscillating cumulant schedule"))
    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("suite", nargs="?", default="all", choices=["all", *checks.SUITES])
    p.add_argument("--out", metavar="PATH")
    return parser


def _verify(args) -> int:
    results = checks.run_suite(args.suite)
    lines = []
    failed = False
    for c in results:
        failed |= c.verdict == checks.FAIL
        m = format(c.measured, ".6g") if isinstance(c.measured, float) else str(c.measured)
        b = format(c.bound, ".6g") if isinstance(c.bound, float) else str(c.bound)
        lines.append(f"{c.verdict.upper():6s} {c.name} | measured={m} | bound={b}")
    lines.append(f"{sum(c.verdict == checks.PASS for c in results)} passed, "
                 f"{sum(c.verdict == checks.FAIL for c in results)} failed, "
                 f"{sum(c.verdict == checks.REPORT for c in results)} reported")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_FAIL if failed else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _threads()
        if args.command == "verify":
            return _verify(args)
        cfg = load_config(args.config)
        if getattr(args, "seed", None) is not None:
            cfg.seed = args.seed
        fmt_ = args.format or cfg.output_format
        if fmt_ not in ("csv", "svg"):
            raise ConfigError(f"field 'output.format': expected csv or svg, got {fmt_!r}")
        out = args.out or cfg.output_path
        status = EXIT_OK
        if args.command == "rate":
            header, rows, series = cmd_rate(cfg)
        elif args.command == "simulate":
            header, rows, series = cmd_simulate(cfg)
        elif args.command == "oracle":
            header, rows, series, ok = cmd_oracle(cfg)
            status = EXIT_OK if ok else EXIT_FAIL
        else:
            header, rows, series, ok = cmd_counterexample(cfg)
            status = EXIT_OK if ok else EXIT_FAIL
        _emit(_render(fmt_, header, rows, series, args.command), out)
        return status
    except ConfigError as exc:
        print(f"primedev: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CapacityError, DomainError, InfeasibleError, UnsupportedSpecError) as exc:
        print(f"primedev: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
