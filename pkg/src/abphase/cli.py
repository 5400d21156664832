"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage/config/parse error,
3 geometric precondition violation (fluxon core, grid domain).
"""

import argparse
import io
import math
import os
import sys
import time

import numpy as np

from . import gauges, sources
from .gauge_transform import ConvergenceError, build_gauge_problem, coulomb_from_temporal, solve_poisson
from .model import (
    BranchCutError,
    ConfigError,
    GeometryError,
    PathError,
    RegularizationParams,
    SetupConfig,
    load_config,
    read_path,
    validate_config,
)
from .oracles import reports_csv, reports_text, run_suite
from .phase import QuadratureSpec, loop_phase

CONFIG_ENV = "ABPHASE_CONFIG"

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_GEOMETRY = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _config(args):
    path = args.config or os.environ.get(CONFIG_ENV)
    if path:
        if not os.path.exists(path):
            raise UsageError(f"config file not found: {path}")
        return load_config(path)
    return validate_config(SetupConfig(), RegularizationParams())


def _emit(text, out):
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _quad_spec(args):
    return QuadratureSpec(rel_tol=args.rel_tol, abs_tol=args.abs_tol)


# -- subcommands ---------------------------------------------------------------


def cmd_phase(args):
    cfg, reg = _config(args)
    if not os.path.exists(args.path):
        raise UsageError(f"path file not found: {args.path}")
    loop = read_path(args.path)
    if not loop.closed:
        raise PathError("loop not closed")
    if args.setup != "rect" and args.gauge != "temporal":
        raise UsageError("only the temporal gauge is available for the rhombus and toroidal setups")
    if args.gauge == "temporal":
        cls = {
            "rect": gauges.RectTemporalGauge,
            "rhombus": gauges.RhombusTemporalGauge,
            "toroidal": gauges.ToroidalTemporalGauge,
        }[args.setup]
        field = cls(cfg, reg)
    elif args.gauge == "coulomb":
        field = gauges.RectCoulombGauge(cfg, reg)
    else:
        field = coulomb_from_temporal(cfg, reg, n=tuple(args.grid))
    result = loop_phase(field, loop, _quad_spec(args))
    if args.format == "csv":
        text = result.csv()
    else:
        text = (
            f"theta_e: {result.theta_e!r}\ntheta_m: {result.theta_m!r}\n"
            f"theta_total: {result.theta_total!r}\nquad_error: {result.quad_error!r}\n"
        )
    _emit(text, args.out)
    return EXIT_OK


def _box(args, cfg, reg, default):
    lattice = args.lattice or default
    if lattice == "support":
        return sources.SamplingBox.around_support(cfg, reg, args.setup, n=args.support_n)
    n = tuple(args.n)
    if min(n) < 1:
        raise UsageError("lattice sizes must be positive")
    if args.setup == "toroidal":
        R, T = cfg.R_tor, cfg.T
        return sources.SamplingBox(
            np.linspace(-0.25 * T, 1.25 * T, n[0]),
            np.linspace(0.05 * R, 1.5 * R, n[1]),
            np.linspace(-0.25 * R, 0.25 * R, n[2]),
        )
    if args.setup == "rhombus":
        L, T, h = cfg.L, cfg.T, 0.5 * cfg.v * cfg.T + 0.25 * cfg.L
        return sources.SamplingBox(
            np.linspace(-0.25 * T, 1.25 * T, n[0]),
            np.linspace(-h, h, n[1]),
            np.linspace(-0.25 * L, 0.25 * L, n[2]),
        )
    return sources.SamplingBox.uniform(cfg, n)


def cmd_fields(args):
    cfg, reg = _config(args)
    box = _box(args, cfg, reg, "uniform")
    _emit(sources.grid_csv(args.setup, cfg, reg, box, solenoids=not args.drop_solenoids), args.out)
    return EXIT_OK


def cmd_sources(args):
    cfg, reg = _config(args)
    box = _box(args, cfg, reg, "support")
    _emit(sources.grid_csv(args.setup, cfg, reg, box, solenoids=not args.drop_solenoids), args.out)
    return EXIT_OK


def cmd_gauge(args):
    cfg, reg = _config(args)
    domain = tuple(args.domain) if args.domain else None
    problem = build_gauge_problem(gauges.RectTemporalGauge(cfg, reg), n=tuple(args.n), domain=domain)
    start = time.perf_counter()
    solution = solve_poisson(problem, method=args.method, tol=args.tol, max_iter=args.max_iter)
    elapsed = time.perf_counter() - start
    _emit(solution.csv(), args.out)
    report = solution.report.text()
    if args.report:
        with open(args.report, "w", newline="\n") as fh:
            fh.write(report)
    else:
        sys.stderr.write(report)
    # wall time varies run to run, so it never enters an output file
    sys.stderr.write(f"wall_time_s: {elapsed:.3f}\n")
    return EXIT_OK


def figure_f_rows(cfg, xs, y_range, samples):
    """Rows ``(x, y, F)``; every column carries the one-sided rows at
    ``y = -0.0`` and ``y = +0.0`` so the jump across the cut is explicit."""
    lo, hi = y_range
    ys = np.linspace(lo, hi, samples)
    ys = ys[ys != 0.0]
    rows = []
    for x in xs:
        column = [(float(y), gauges.eval_F(x, y, cfg.L)) for y in ys if y < 0]
        if lo <= 0.0 <= hi:
            column.append((-0.0, gauges.eval_F(x, -0.0, cfg.L, side=-1)))
            column.append((0.0, gauges.eval_F(x, 0.0, cfg.L, side=+1)))
        column += [(float(y), gauges.eval_F(x, y, cfg.L)) for y in ys if y > 0]
        rows += [(float(x), y, f) for y, f in column]
    return rows


def cmd_figure_f(args):
    cfg, _ = _config(args)
    try:
        xs = [float(v) for v in args.x_values.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --x-values: {exc}") from exc
    lo, hi = args.y_range
    if not xs or args.samples < 2 or not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise UsageError("need at least one x value, --samples >= 2 and a finite increasing --y-range")
    if any(x in (0.0, cfg.L) for x in xs):
        raise GeometryError("x value lies on a fluxon core")
    buf = io.StringIO()
    buf.write("x,y,F\n")
    for x, y, f in figure_f_rows(cfg, xs, (lo, hi), args.samples):
        buf.write(f"{x!r},{y!r},{f!r}\n")
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_verify(args):
    cfg, reg = _config(args)
    reports = run_suite(
        cfg, reg, seed=args.seed, threads=args.threads, drop_solenoids=args.drop_solenoids
    )
    sys.stdout.write(reports_text(reports))
    if args.out:
        _emit(reports_csv(reports), args.out)
    failed = [r.name for r in reports if not r.passed]
    if failed:
        sys.stderr.write("failed checks: " + ", ".join(failed) + "\n")
        return EXIT_VERIFY
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def build_parser():
    parser = _Parser(prog="abphase", description="Electric and magnetic Aharonov-Bohm phases of the capacitor/fluxon setup.")
    parser.add_argument("--threads", type=int, default=1, help="maximum worker threads (default 1)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help=f"JSON config file (falls back to ${CONFIG_ENV}, then defaults)")
        p.add_argument("--out", help="output file (default: standard output)")

    p = sub.add_parser("phase", help="phase of a closed loop from a path file")
    common(p)
    p.add_argument("path", help="path file: 't x y' per line, trailing 'closed'")
    p.add_argument("--gauge", choices=("temporal", "coulomb", "numeric"), default="temporal")
    p.add_argument("--setup", choices=sources.SETUPS, default="rect")
    p.add_argument("--format", choices=("csv", "text"), default="csv")
    p.add_argument("--rel-tol", type=float, default=1e-10, help="quadrature relative tolerance")
    p.add_argument("--abs-tol", type=float, default=1e-12, help="quadrature absolute tolerance")
    p.add_argument("--grid", type=int, nargs=2, default=(257, 129), metavar=("NX", "NY"), help="grid for --gauge numeric")
    p.set_defaults(func=cmd_phase)

    for name, func, helptext, lattice in (
        ("fields", cmd_fields, "field and source grid CSV on the sampling box", "uniform"),
        ("sources", cmd_sources, "source grid CSV, by default on a lattice clustered on the support", "support"),
    ):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--setup", choices=sources.SETUPS, default="rect")
        p.add_argument("--lattice", choices=("uniform", "support"), help=f"sampling lattice (default {lattice})")
        p.add_argument("--n", type=int, nargs=3, default=(7, 61, 41), metavar=("NT", "NX", "NY"), help="uniform lattice size")
        p.add_argument("--support-n", type=int, default=9, help="points per support cluster")
        p.add_argument("--drop-solenoids", action="store_true", help="omit the solenoid currents")
        p.set_defaults(func=func)

    p = sub.add_parser("gauge", help="numerical Coulomb gauge function on a grid")
    common(p)
    p.add_argument("--n", type=int, nargs=2, default=(257, 129), metavar=("NX", "NY"))
    p.add_argument("--domain", type=float, nargs=4, metavar=("X0", "X1", "Y0", "Y1"))
    p.add_argument("--method", choices=("sor", "multigrid"), default="multigrid")
    p.add_argument("--tol", type=float, default=1e-10, help="max-norm residual tolerance")
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--report", help="solver report file (default: standard error)")
    p.set_defaults(func=cmd_gauge)

    p = sub.add_parser("figure-f", help="F(x, y) columns against y")
    common(p)
    p.add_argument("--x-values", default="-0.5,0.25,0.5,0.75,1.5", help="comma-separated x values")
    p.add_argument("--y-range", type=float, nargs=2, default=(-2.0, 2.0), metavar=("Y0", "Y1"))
    p.add_argument("--samples", type=int, default=201)
    p.set_defaults(func=cmd_figure_f)

    p = sub.add_parser("verify", help="run the verification suite")
    common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--drop-solenoids", action="store_true", help="negative control: omit solenoid currents")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except GeometryError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_GEOMETRY
    except (UsageError, ConfigError, PathError, BranchCutError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except ConvergenceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
