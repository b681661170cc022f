#!/usr/bin/env python3
"""Time the numba kernels against their numpy fallbacks.

Covers the two step updates, the matrix-free PCG solve, and a short PGS run
on the CG path with each backend selected through ``set_backend``. Numba
functions are called once before timing so compilation is excluded.

    python3 benchmarks/bench_kernels.py --m 4000 --n 3200 --repeat 20
"""

import argparse
import time

import numpy as np

from l1lap import SolverConfig, random_instance, solve
from l1lap import _kernels


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(m, n, rng):
    x = rng.uniform(1e-3, 2, m)
    x0 = rng.uniform(1e-3, 2, m)
    g = rng.standard_normal(m)
    cum = rng.standard_normal(m)
    A = rng.standard_normal((n, m))
    rhs = rng.standard_normal(n)
    p0 = np.zeros(n)
    return {
        "pgs_update": lambda impl: impl[0](x, g, 1 / 3.5, 1e-15),
        "ags_update": lambda impl: impl[1](x, x0, g, cum, 2.0, 1 / 3.5, 1e-15, 0.4, False),
        "ags2_update": lambda impl: impl[1](x, x0, g, cum, 2.0, 1 / 1.1, 1e-15, 1e-15, True),
        "pcg": lambda impl: impl[2](A, x, rhs, p0, 1e-10, 10 * n),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--n", type=int, default=1600)
    ap.add_argument("--repeat", type=int, default=10)
    ap.add_argument("--solve-iters", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = _kernels.available_backends()
    print(f"backends: {', '.join(backends)}; m={args.m} n={args.n}")
    rng = np.random.default_rng(args.seed)
    cases = kernel_cases(args.m, args.n, rng)

    print(f"{'kernel':<14}" + "".join(f"{b + ' ms':>14}" for b in backends) + f"{'speedup':>10}")
    for name, call in cases.items():
        t = {b: best_of(lambda: call(_kernels._IMPLS[b]), args.repeat) for b in backends}
        line = f"{name:<14}" + "".join(f"{1e3 * t[b]:>14.3f}" for b in backends)
        if "numba" in t:
            line += f"{t['numpy'] / t['numba']:>9.2f}x"
        print(line)

    # end to end, CG path so both the step and solve kernels are exercised
    inst = random_instance(args.m // 4, args.n // 4, 0.2, args.seed)
    cfg = SolverConfig("pgs", max_iters=args.solve_iters, gap_tol=0.0, linear_solver="cg")
    before = _kernels.BACKEND
    t = {}
    try:
        for b in backends:
            _kernels.set_backend(b)
            t[b] = best_of(lambda: solve(inst, cfg), max(1, args.repeat // 5))
    finally:
        _kernels.set_backend(before)
    line = f"{'pgs_solve':<14}" + "".join(f"{1e3 * t[b]:>14.3f}" for b in backends)
    if "numba" in t:
        line += f"{t['numpy'] / t['numba']:>9.2f}x"
    print(line + f"   ({args.solve_iters} iters, m={inst.m} n={inst.n})")


if __name__ == "__main__":
    main()
