"""Command-line interface: ``l1lap solve``, ``l1lap bench``, ``l1lap generate``.

Exit codes for ``solve``: 0 when the duality-gap target is met, 2 when the
iteration budget runs out first, 1 on any error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import IllConditioned, L1LapError, NoConvergence
from .instance import load_instance, random_instance, save_instance
from .oracle import MAX_ORACLE_M, brute_force_bp
from .solvers import THEORETICAL, VARIANTS, RunStatus, SolverConfig, solve

log = logging.getLogger("l1lap")

EXIT_OK, EXIT_ERROR, EXIT_BUDGET = 0, 1, 2
TRACE_COLUMNS = ["iter", "f", "l1", "gap", "elapsed_ms"]
FLOOR_RETRY_FACTOR = 1e3
_INIT = {"ls": "least_squares", "ones": "ones"}


def _number_or_theoretical(kind):
    def parse(text):
        if text == THEORETICAL:
            return text
        try:
            val = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"expected a number or {THEORETICAL!r}, got {text!r}") from None
        if val <= 0 and kind is float:
            raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
        return val
    return parse


def _add_solver_options(p):
    p.add_argument("--eps", type=float, default=0.1,
                   help="relative error target used by theoretical parameters")
    p.add_argument("--beta", type=_number_or_theoretical(float), default=None,
                   help="step parameter, or 'theoretical' (default: 3.5, 3.5, 1.1)")
    p.add_argument("--delta", type=_number_or_theoretical(float), default=None,
                   help="weight floor, or 'theoretical' (default: 1e-15)")
    p.add_argument("--gap-tol", type=float, default=None,
                   help="stop when gap <= gap_tol * ||s||_1")
    p.add_argument("--init", choices=sorted(_INIT), default="ls")
    p.add_argument("--tau", type=float, default=1e-15, help="ags2 mixing weight")
    p.add_argument("--trace-every", type=int, default=1)
    p.add_argument("--solve-tol", type=float, default=1e-12)
    p.add_argument("--linear-solver", choices=["auto", "dense", "cg"], default="auto")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="l1lap",
        description="Basis pursuit (min ||s||_1 s.t. As=b) by dissipation minimization.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path,
                     help="instance JSON, or Matrix Market (.mtx) matrix")
    src.add_argument("--random", nargs=3, metavar=("M", "N", "DENSITY"),
                     help="generate a random instance instead of reading one")
    p.add_argument("--rhs", type=Path,
                   help="right-hand side for .mtx input, one real per line "
                        "(default: <stem>_b.txt)")
    p.add_argument("--seed", type=int, default=0, help="seed for --random")
    p.add_argument("--solver", choices=VARIANTS, default="pgs")
    p.add_argument("--max-iters", type=_number_or_theoretical(int), default=10_000)
    p.add_argument("--trace", type=Path, help="write the per-iteration trace CSV here")
    p.add_argument("--output", type=Path, help="result JSON path (default: stdout)")
    p.add_argument("--retries", type=int, default=3,
                   help="on numerical breakdown, retry with the floor raised 1000x")
    _add_solver_options(p)
    p.set_defaults(func=cmd_solve, gap_tol_default=1e-8)

    b = sub.add_parser("bench", help="run solvers on random instances, emit long CSV")
    b.add_argument("--m", type=int, default=100)
    b.add_argument("--n", type=int, default=80)
    b.add_argument("--density", type=float, default=0.2)
    b.add_argument("--seeds", type=int, default=20, help="number of instances")
    b.add_argument("--seed-base", type=int, default=0)
    b.add_argument("--solvers", default="pgs,ags,ags2")
    b.add_argument("--max-iters", type=int, default=2000)
    b.add_argument("--output", type=Path, help="CSV path (default: stdout)")
    b.add_argument("--no-timing", action="store_true",
                   help="omit the elapsed_ms column (byte-reproducible output)")
    _add_solver_options(b)
    b.set_defaults(func=cmd_bench, gap_tol_default=1e-10)

    g = sub.add_parser("generate", help="write a random instance as JSON")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--density", type=float, default=0.2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--output", type=Path, required=True)
    g.set_defaults(func=cmd_generate)
    return parser


def _config(args, variant, max_iters):
    gap_tol = args.gap_tol if args.gap_tol is not None else args.gap_tol_default
    return SolverConfig(
        variant=variant, eps=args.eps, beta=args.beta, delta=args.delta,
        max_iters=max_iters, gap_tol=gap_tol, init=_INIT[args.init],
        solve_tol=args.solve_tol, trace_every=args.trace_every, tau=args.tau,
        linear_solver=args.linear_solver)


def _load(args):
    if args.input is not None:
        try:
            return load_instance(args.input, rhs=args.rhs)
        except OSError as exc:
            raise L1LapError(f"{exc.filename or args.input}: {exc.strerror or exc}") from None
        except L1LapError as exc:
            if not str(exc).startswith(str(args.input)):
                exc.args = (f"{args.input}: {exc}",)
            raise
    m, n, density = args.random
    return random_instance(int(m), int(n), float(density), args.seed)


def _records(run):
    if run.trace and run.trace[0].k == 0:
        return run.trace
    return [run.initial, *run.trace]


def write_trace(path, run):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for r in run.trace:
            w.writerow([r.k, repr(r.f), repr(r.l1), repr(r.gap),
                        f"{1e3 * r.elapsed:.3f}"])


def _solve_with_retries(inst, config, retries):
    attempts = []
    for attempt in range(retries + 1):
        try:
            run = solve(inst, config)
            error = None
        except (IllConditioned, NoConvergence) as exc:
            run, error = None, exc
        if run is not None:
            attempts.append({"delta": run.params["delta"], "status": run.status.value,
                             "message": run.message})
            if run.status is not RunStatus.ERROR or not run.breakdown:
                return run, attempts
            error = run.message
        else:
            attempts.append({"delta": config.resolve(inst)[1], "status": "Error",
                             "message": str(error)})
        if attempt < retries:
            delta = config.resolve(inst)[1] * FLOOR_RETRY_FACTOR
            log.warning("numerical breakdown (%s); retrying with delta=%.3g",
                        error, delta)
            config = replace(config, delta=delta)
    if run is None:
        raise L1LapError(f"all {retries + 1} attempts failed: {error}")
    return run, attempts


def cmd_solve(args):
    inst = _load(args)
    config = _config(args, args.solver, args.max_iters)
    run, attempts = _solve_with_retries(inst, config, args.retries)
    if args.trace is not None:
        write_trace(args.trace, run)
    config_echo = config.echo()
    config_echo.update(resolved=run.params, seed=args.seed,
                       input=str(args.input) if args.input else None,
                       random=args.random)
    report = {
        "status": run.status.value,
        "iters": run.iterations,
        "l1": run.l1,
        "f": run.f,
        "gap": run.gap,
        "elapsed_ms": 1e3 * run.elapsed,
        "s": run.final_s.tolist(),
        "config": config_echo,
        "instance": inst.summary(),
        "trace": str(args.trace) if args.trace else None,
        "message": run.message,
        "attempts": attempts,
    }
    text = json.dumps(report, indent=2)
    if args.output is not None:
        args.output.write_text(text + "\n")
    else:
        print(text)
    return {RunStatus.GAP_REACHED: EXIT_OK, RunStatus.MAX_ITERS: EXIT_BUDGET}.get(
        run.status, EXIT_ERROR)


def cmd_bench(args):
    variants = [v.strip().lower() for v in args.solvers.split(",") if v.strip()]
    for v in variants:
        if v not in VARIANTS:
            raise L1LapError(f"unknown solver {v!r} in --solvers")
    columns = ["solver", "seed", "iter"] + ([] if args.no_timing else ["elapsed_ms"]) \
        + ["l1", "gap", "rel_error"]
    rows = []
    for i in range(args.seeds):
        seed = args.seed_base + i
        inst = random_instance(args.m, args.n, args.density, seed)
        runs = {v: solve(inst, _config(args, v, args.max_iters)) for v in variants}
        if inst.m <= MAX_ORACLE_M:
            ref = brute_force_bp(inst).optimum_value
        else:
            ref = min(r.l1 for run in runs.values() for r in _records(run))
        for v, run in runs.items():
            log.info("seed %d %s: %s after %d iterations, l1=%.12g",
                     seed, v, run.status.value, run.iterations, run.l1)
            for r in _records(run):
                row = [v, seed, r.k]
                if not args.no_timing:
                    row.append(f"{1e3 * r.elapsed:.3f}")
                row += [repr(r.l1), repr(r.gap), repr((r.l1 - ref) / ref)]
                rows.append(row)

    fh = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(columns)
        w.writerows(rows)
    finally:
        if args.output:
            fh.close()
    return EXIT_OK


def cmd_generate(args):
    inst = random_instance(args.m, args.n, args.density, args.seed)
    save_instance(inst, args.output)
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except L1LapError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
