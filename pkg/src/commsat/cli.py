"""``commsat`` command line: gen, solve, scan, balls, dc.

Exit codes follow the SAT-solver convention: 10 SAT, 20 UNSAT, 0 for any
other success (including UNKNOWN), 2 for usage, parse and validation errors.
"""
from __future__ import annotations

import argparse
import contextlib
import os
import sys

from .analysis import dc_residual, solve_dc
from .ballsbins import critical_ball_count
from .errors import BudgetExceeded, CommsatError
from .experiments import balls_battery, parse_plan, run_plan, write_csv
from .generator import GeneratorConfig, sample_instance
from .model import Layout, Mixture, read_dimacs, write_dimacs
from .solver import DEFAULT_BUDGET, solve

EXIT_OK, EXIT_USAGE, EXIT_SAT, EXIT_UNSAT = 0, 2, 10, 20


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _read_text(path):
    if path in (None, "-"):
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def cmd_gen(args) -> int:
    layout = Layout.from_n(args.n, args.B)
    config = GeneratorConfig(layout, args.m, Mixture.parse(args.mixture), args.seed)
    with _output(args.out) as out:
        write_dimacs(sample_instance(config), out)
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = read_dimacs(_read_text(args.input))
    try:
        result = solve(instance, args.budget)
    except BudgetExceeded:
        print("UNKNOWN")
        return EXIT_OK
    if not result.sat:
        print("UNSAT")
        return EXIT_UNSAT
    print("SAT")
    if args.witness:
        lits = [v + 1 if x else -(v + 1) for v, x in enumerate(result.witness)]
        print("v " + " ".join(map(str, lits)) + " 0")
    return EXIT_SAT


def cmd_scan(args) -> int:
    plan = parse_plan(_read_text(args.plan))
    workers = args.threads or plan.threads or os.cpu_count() or 1
    cells = run_plan(plan, workers=workers, timing=args.timing)
    with _output(args.out) as out:
        write_csv(cells, out)
    return EXIT_OK


def cmd_balls(args) -> int:
    balls = args.balls if args.balls is not None else critical_ball_count(args.C, args.bins, args.s)
    battery = balls_battery(args.bins, balls, args.s, args.trials, args.seed)
    with _output(args.out) as out:
        battery.write_csv(out)
    if args.summary:
        for key, value in battery.summary().items():
            print(f"# {key} = {value:.6g}", file=sys.stderr)
    return EXIT_OK


def cmd_dc(args) -> int:
    d = solve_dc(args.c)
    print(f"d_c = {d!r}")
    print(f"residual = {dc_residual(args.c, d):.3e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="commsat", description="Community-structured random SAT toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample an instance and write DIMACS")
    p.add_argument("--n", type=int, required=True, help="number of variables")
    p.add_argument("--B", type=int, required=True, help="number of communities (must divide n)")
    p.add_argument("--mixture", required=True, help='clause-type mixture, e.g. "3:0.2;1,1,1:0.8"')
    p.add_argument("--m", type=int, required=True, help="number of clauses")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="decide a DIMACS instance")
    p.add_argument("input", nargs="?", default="-")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="DPLL node limit")
    p.add_argument("--witness", action="store_true", help="print a 'v ... 0' line for SAT")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("scan", help="run an experiment plan and write CSV")
    p.add_argument("--plan", required=True)
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--timing", action="store_true", help="fill mean_solve_ms (makes output non-reproducible)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("balls", help="balls-and-bins battery as CSV")
    p.add_argument("--bins", type=int, required=True)
    count = p.add_mutually_exclusive_group(required=True)
    count.add_argument("--balls", type=int)
    count.add_argument("--C", type=float, help="use M = C * bins^(1 - 1/s)")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--s", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--summary", action="store_true", help="moment summary on stderr")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_balls)

    p = sub.add_parser("dc", help="solve for d_c")
    p.add_argument("--c", type=float, required=True)
    p.set_defaults(func=cmd_dc)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CommsatError, ValueError, OSError) as exc:
        print(f"commsat {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
