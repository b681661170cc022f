"""Independent reference computations used to check the solvers.

Nothing here touches the Laplacian machinery except through the public
``potential``/``gradient`` functions being differenced.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .dissipation import gradient, potential
from .errors import Infeasible, SizeLimitExceeded, StepTooLarge, TooLarge
from .laplacian import SMALL_LIMIT

MAX_ORACLE_M = 16
CONSISTENCY_TOL = 1e-9


@dataclass(frozen=True)
class OracleResult:
    optimum_value: float
    optimum_s: np.ndarray
    support: tuple
    ties: int


def brute_force_bp(inst, tol=CONSISTENCY_TOL):
    """Exact basis-pursuit optimum by enumerating basic solutions.

    An LP optimum is attained at a vertex, i.e. a solution supported on
    linearly independent columns. Every column subset of size ``<= n`` is
    tried; the smallest l1 norm wins, ties going to the lexicographically
    smallest support. ``ties`` counts distinct optimal supports.
    """
    A, b = inst.A, inst.b
    n, m = A.shape
    if m > MAX_ORACLE_M:
        raise TooLarge(f"brute force limited to m <= {MAX_ORACLE_M}, got m={m}")
    scale = max(1.0, np.linalg.norm(b))

    candidates = {}
    for size in range(0, n + 1):
        for cols in combinations(range(m), size):
            cols = list(cols)
            if size == 0:
                if np.linalg.norm(b) <= tol:
                    candidates[()] = np.zeros(m)
                continue
            sub = A[:, cols]
            coef, _, rank, _ = np.linalg.lstsq(sub, b, rcond=None)
            if rank < size:
                continue
            if np.linalg.norm(sub @ coef - b) > tol * scale:
                continue
            s = np.zeros(m)
            s[cols] = coef
            support = tuple(int(j) for j in np.flatnonzero(np.abs(s) > 1e-12 * scale))
            candidates.setdefault(support, s)
    if not candidates:
        raise Infeasible("no basic solution satisfies A s = b")

    values = {sup: float(np.abs(s).sum()) for sup, s in candidates.items()}
    best = min(values.values())
    optimal = sorted(sup for sup, v in values.items()
                     if v <= best + 1e-9 * max(1.0, best))
    support = optimal[0]
    return OracleResult(optimum_value=values[support],
                        optimum_s=candidates[support], support=support,
                        ties=len(optimal))


def _steps(x, h):
    x = np.asarray(x, dtype=float)
    steps = h * np.abs(x) if np.ndim(h) == 0 else np.asarray(h, float)
    if np.any(x - steps <= 0):
        raise StepTooLarge("x - h e_j must stay positive for every coordinate")
    return x, steps


def fd_gradient(inst, x, h=1e-6):
    """Central differences of the potential with per-coordinate step ``h * x_j``."""
    x, steps = _steps(x, h)
    g = np.empty(inst.m)
    for j in range(inst.m):
        e = np.zeros(inst.m)
        e[j] = steps[j]
        g[j] = (potential(inst, x + e).f - potential(inst, x - e).f) / (2 * steps[j])
    return g


def fd_hessian(inst, x, h=1e-6, small_limit=SMALL_LIMIT):
    """Central differences of the analytic gradient, symmetrized."""
    if inst.m > small_limit:
        raise SizeLimitExceeded(f"m={inst.m} exceeds small_limit={small_limit}")
    x, steps = _steps(x, h)
    H = np.empty((inst.m, inst.m))
    for j in range(inst.m):
        e = np.zeros(inst.m)
        e[j] = steps[j]
        H[:, j] = (gradient(inst, x + e) - gradient(inst, x - e)) / (2 * steps[j])
    return 0.5 * (H + H.T)
