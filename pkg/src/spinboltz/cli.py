"""Command-line entry point.

    spinboltz simulate --config FILE [--preset rb87] [--out DIR] [--svg]
    spinboltz damping  [--config FILE] --temps 9e-6,10e-6,11e-6 --t-eval 0.016
    spinboltz gauge    [--config FILE] (--from DIR | --inline)
    spinboltz validate [--suite NAME]

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 validation failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config, preset
from .gauge import SolverError
from .transport import NumericalError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 1, 2, 3


def _config(args):
    base = preset(args.preset)
    return load_config(args.config, base) if args.config else base


def _out(args, cfg) -> Path:
    return Path(args.out or cfg.output.directory)


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--temps: cannot parse {text!r}") from None


def cmd_simulate(args) -> int:
    from .scenarios import run_simulate

    cfg = _config(args)
    res = run_simulate(cfg, _out(args, cfg), svg=args.svg or None)
    print(res.message)
    for f in res.files:
        print(f"wrote {f}")
    return EXIT_OK


def cmd_damping(args) -> int:
    from .scenarios import run_damping

    cfg = _config(args)
    temps = _float_list(args.temps) if args.temps else None
    res = run_damping(cfg, temps, args.t_eval, _out(args, cfg), svg=args.svg or None)
    for k, T in enumerate(res.temperatures):
        print(f"T = {T:.4g}: f11 range [{res.f11[k].min():.4e}, {res.f11[k].max():.4e}]")
    for f in res.files:
        print(f"wrote {f}")
    return EXIT_OK


def cmd_gauge(args) -> int:
    from .scenarios import load_damping, run_gauge

    cfg = _config(args)
    damping = load_damping(args.source) if args.source else None
    res = run_gauge(cfg, damping, _out(args, cfg), svg=args.svg or None)
    print(f"temperature = {res.temperature:.4g}")
    print(f"poisson residual = {res.poisson_residual:.3e}")
    print(f"matching residual (max) = {float(np.max(res.matching_residual)):.3e}")
    print(f"analytic check error = {res.analytic_error:.3e}")
    for f in res.files:
        print(f"wrote {f}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import format_report, run_validate

    try:
        results = run_validate(args.suite or None)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    print(format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinboltz", description="Single-mode spinor Boltzmann dynamics "
                                "for a trapped spin-1 Bose gas, damping forces and thermal gauge potentials.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key = value configuration file")
        sp.add_argument("--preset", default="rb87")
        sp.add_argument("--out", help="output directory (default: output.directory)")
        sp.add_argument("--svg", action="store_true", help="also write SVG plots")

    s = sub.add_parser("simulate", help="evolve rho and analyse the pair populations")
    common(s)
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("damping", help="damping force versus position at several temperatures")
    common(d)
    d.add_argument("--temps", help="comma-separated temperatures in K")
    d.add_argument("--t-eval", type=float, help="time at which rho is taken (s)")
    d.set_defaults(func=cmd_damping)

    g = sub.add_parser("gauge", help="thermal gauge potentials from a damping force")
    common(g)
    src = g.add_mutually_exclusive_group()
    src.add_argument("--from", dest="source", help="directory (or force.csv) from a damping run")
    src.add_argument("--inline", action="store_true", help="recompute the damping force (default)")
    g.set_defaults(func=cmd_gauge)

    v = sub.add_parser("validate", help="run the oracle suites")
    v.add_argument("--suite", action="append", help="suite name (repeatable)")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, SolverError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
