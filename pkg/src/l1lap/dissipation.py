"""The dissipation potential ``f(x) = 1^T x + b^T L(x)^-1 b`` and friends.

Minimizing ``f/2`` over the positive orthant has the same optimal value as
basis pursuit, and every positive ``x`` induces a feasible point
``q(x) = diag(x) A^T L(x)^-1 b`` with ``||q(x)||_1 <= f(x)/2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidEps, NonPositiveInput, SizeLimitExceeded, ZeroEntry
from .laplacian import SMALL_LIMIT, check_weights, solve_system, transfer_matrix

TINY_FLOOR = 1e-300


@dataclass(frozen=True)
class PotentialEval:
    f: float
    linear_term: float
    laplacian_term: float
    gradient: np.ndarray
    solve: object  # LaplacianSolve

    @property
    def q(self):
        return self.solve.q

    @property
    def d(self):
        return self.solve.d


@dataclass(frozen=True)
class DualCertificate:
    """Dual-feasible point of the LP form of basis pursuit and its gap.

    ``gap`` bounds ``||s||_1 - OPT`` from above for the certified primal
    point ``s`` (the induced solution of the evaluated weights).
    """

    nu: np.ndarray
    lam: np.ndarray
    mu: np.ndarray
    rho: float
    gap: float
    l1: float
    dual_value: float


def potential(inst, x, **solve_kw):
    """Evaluate ``f``, its two terms and its gradient with one Laplacian solve."""
    x = check_weights(x, inst.m)
    sol = solve_system(inst, x, **solve_kw)
    lin = float(x.sum())
    lap = float(inst.b @ sol.p)
    return PotentialEval(f=lin + lap, linear_term=lin, laplacian_term=lap,
                         gradient=1.0 - sol.d ** 2, solve=sol)


def gradient(inst, x, **solve_kw):
    """``grad f(x)_j = 1 - d_j(x)^2`` with ``d(x) = A^T L(x)^-1 b``."""
    return potential(inst, x, **solve_kw).gradient


def hessian(inst, x, small_limit=SMALL_LIMIT, **solve_kw):
    """``2 (d d^T) * T(x)`` (entrywise product); dense, test-sized only."""
    if inst.m > small_limit:
        raise SizeLimitExceeded(f"m={inst.m} exceeds small_limit={small_limit}")
    d = solve_system(inst, x, **solve_kw).d
    T = transfer_matrix(inst, x, small_limit=small_limit)
    H = 2.0 * np.outer(d, d) * T
    return 0.5 * (H + H.T)


def least_squares_solution(inst):
    """Minimum-l2-norm solution ``u = A^T (A A^T)^-1 b``."""
    u, *_ = np.linalg.lstsq(inst.A, inst.b, rcond=None)
    return u


def c_const(inst):
    """``b^T (A A^T)^-1 b``, the squared l2 norm of the least-squares solution."""
    u = least_squares_solution(inst)
    return float(u @ u)


def delta_floor(inst, eps):
    if not 0 < eps < 1:
        raise InvalidEps(f"eps must lie in (0, 1), got {eps}")
    return eps * np.sqrt(c_const(inst)) / (2 * inst.m)


def duality_gap(inst, x, q=None, tiny_floor=TINY_FLOOR, **solve_kw):
    """Certify the induced solution ``q(x)`` with a dual-feasible point.

    The certificate is built at ``y = max(|q(x)|, tiny_floor)``:
    ``nu = L(y)^-1 b / rho`` with ``rho = ||A^T L(y)^-1 b||_inf`` gives
    ``||A^T nu||_inf <= 1``, so ``b^T nu`` is a lower bound on the optimum and
    ``gap = ||q||_1 - b^T nu``. When no entry of ``q`` is floored this equals
    ``(1 + 1/rho) ||q||_1 - f(y)/rho``.

    Because ``rho`` is measured on the computed potentials, dual feasibility
    holds up to rounding even if the inner solve is inaccurate; the solve is
    therefore run without a condition limit unless one is passed.
    """
    if q is None:
        q = solve_system(inst, x, **solve_kw).q
    q = np.asarray(q, dtype=float)
    y = np.maximum(np.abs(q), tiny_floor)
    solve_kw.setdefault("cond_limit", np.inf)
    sol = solve_system(inst, y, **solve_kw)
    rho = float(np.max(np.abs(sol.d)))
    nu = sol.p / rho
    Atnu = sol.d / rho
    dual_value = float(inst.b @ nu)
    l1 = float(np.abs(q).sum())
    return DualCertificate(nu=nu, lam=(1.0 - Atnu) / 2.0, mu=(1.0 + Atnu) / 2.0,
                           rho=rho, gap=l1 - dual_value, l1=l1,
                           dual_value=dual_value)


def bregman_entropy(x, y):
    """Relative entropy ``sum x log(x/y) - x + y`` (Bregman divergence of
    the negative entropy)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(x > 0) and np.all(y > 0)):
        raise NonPositiveInput("relative entropy needs strictly positive vectors")
    return float(np.sum(x * np.log(x / y) - x + y))


def l1_variational_check(s):
    """``(1/2) sum(s_j^2 / x_j + x_j)`` at ``x = |s|``; equals ``||s||_1``."""
    s = np.asarray(s, dtype=float)
    if np.any(s == 0):
        raise ZeroEntry("s has a zero entry; the weighted form is undefined there")
    x = np.abs(s)
    return float(0.5 * np.sum(s * s / x + x))
