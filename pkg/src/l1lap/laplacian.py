"""Linear algebra around the weighted matrix ``L(x) = A diag(x) A^T``.

For a grounded network incidence matrix ``A`` this is the reduced weighted
Laplacian; for general full-rank ``A`` it is symmetric positive definite
whenever every weight is positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg.lapack import dpocon

from . import _kernels
from .errors import (
    DimensionMismatch,
    IllConditioned,
    NoConvergence,
    NonFinite,
    NonPositiveWeight,
    SizeLimitExceeded,
)

SOLVE_TOL = 1e-12
COND_LIMIT = 1e14
DENSE_LIMIT = 2000
SMALL_LIMIT = 512
_REFINE_STEPS = 3


def check_weights(x, m, floor=0.0):
    """Return ``x`` as a float vector of length ``m`` with entries ``> floor``.

    ``floor=0`` checks strict positivity; solvers pass their own floor
    through :func:`numpy.maximum` instead of calling this.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (m,):
        raise DimensionMismatch(f"weight vector has shape {x.shape}, expected ({m},)")
    if not np.all(np.isfinite(x)):
        raise NonFinite("weight vector has non-finite entries")
    if not np.all(x > floor):
        j = int(np.argmin(x))
        raise NonPositiveWeight(f"weight x[{j}] = {x[j]!r} is not > {floor}")
    return x


@dataclass(frozen=True)
class WarmStart:
    """Initial iterate for the next iterative solve (previous potentials)."""

    p: np.ndarray


@dataclass(frozen=True)
class LaplacianSolve:
    p: np.ndarray
    d: np.ndarray
    q: np.ndarray
    residual_norm: float
    warm_state: WarmStart
    method: str
    iterations: int = 0


def laplacian_matrix(inst, x):
    x = check_weights(x, inst.m)
    L = (inst.A * x) @ inst.A.T
    return 0.5 * (L + L.T)


def _factor(A, x, cond_limit):
    """Upper Cholesky factor of ``L(x)`` after symmetric diagonal scaling.

    Returns ``(L, (factor, lower), scale)`` with ``S L S = F^T F`` and
    ``S = diag(scale)``. If Cholesky of the explicitly formed matrix breaks
    down, the same factor is computed by QR of ``diag(sqrt(x)) A^T S``,
    which does not lose the small-weight columns to rounding in ``L``.
    The condition check is on the scaled matrix.
    """
    L = (A * x) @ A.T
    L = 0.5 * (L + L.T)
    scale = 1.0 / np.sqrt(np.diag(L))
    Ls = L * scale[:, None] * scale[None, :]
    try:
        c, lower = scipy.linalg.cho_factor(Ls, lower=False, check_finite=False)
    except np.linalg.LinAlgError:
        W = (np.sqrt(x)[:, None] * A.T) * scale[None, :]
        c = scipy.linalg.qr(W, mode="r", check_finite=False)[0][: A.shape[0]]
        c = np.triu(c) * np.sign(np.diag(c))[:, None]
        lower = False
        if not np.all(np.diag(c) > 0):
            raise IllConditioned(np.inf, cond_limit) from None
    if np.isfinite(cond_limit):
        anorm = np.abs(Ls).sum(axis=0).max()
        rcond, _ = dpocon(c, anorm)
        est = np.inf if rcond == 0 else 1.0 / rcond
        if est > cond_limit:
            raise IllConditioned(est, cond_limit)
    return L, (c, lower), scale


def _dense_solve(A, x, rhs, solve_tol, cond_limit):
    L, fac, scale = _factor(A, x, cond_limit)
    p = scale * scipy.linalg.cho_solve(fac, scale * rhs, check_finite=False)
    bnorm = np.linalg.norm(rhs)
    res = np.linalg.norm(L @ p - rhs) / bnorm if bnorm > 0 else 0.0
    for _ in range(_REFINE_STEPS):
        if res <= solve_tol:
            break
        r = rhs - L @ p
        p = p + scale * scipy.linalg.cho_solve(fac, scale * r, check_finite=False)
        res = np.linalg.norm(L @ p - rhs) / bnorm
    if not res <= max(solve_tol, residual_floor(L, p, rhs)):
        raise NoConvergence(res, _REFINE_STEPS)
    return p, res


def residual_floor(L, p, rhs):
    """Relative residual a backward-stable solve can guarantee, ``~ n u ||L|| ||p|| / ||rhs||``.

    Below this no working-precision refinement helps, so the dense path
    only fails when the residual exceeds both it and ``solve_tol``.
    """
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0:
        return 0.0
    eps = np.finfo(float).eps
    return 10 * L.shape[0] * eps * np.linalg.norm(L) * np.linalg.norm(p) / bnorm


def solve_system(inst, x, rhs=None, warm=None, solve_tol=SOLVE_TOL,
                 method="auto", cond_limit=COND_LIMIT, max_inner=None):
    """Solve ``L(x) p = rhs`` and derive voltages and the induced solution.

    Parameters
    ----------
    inst : BpInstance
    x : array_like
        Strictly positive weights, length ``m``.
    rhs : array_like, optional
        Right-hand side, defaults to ``inst.b``.
    warm : WarmStart, optional
        Starting iterate for the iterative path; ignored by the dense path.
    solve_tol : float
        Target relative residual ``||L p - rhs|| / ||rhs||``.
    method : {"auto", "dense", "cg"}
        ``"auto"`` uses dense Cholesky when ``n <= 2000`` and
        preconditioned conjugate gradients otherwise.
    cond_limit : float
        Dense path raises :class:`IllConditioned` above this estimate.
        Either path raises :class:`NoConvergence` if the relative residual
        stays above ``solve_tol``. On the dense path, after iterative
        refinement, the threshold is raised to :func:`residual_floor` when
        ``L(x)`` is too ill-conditioned for ``solve_tol`` to be attainable.
    max_inner : int, optional
        Iteration cap for the iterative path (default ``10 * n``).

    Returns
    -------
    LaplacianSolve
        ``p``, voltages ``d = A^T p`` and induced solution ``q = x * d``.
    """
    x = check_weights(x, inst.m)
    rhs = inst.b if rhs is None else np.asarray(rhs, dtype=float)
    if rhs.shape != (inst.n,):
        raise DimensionMismatch(f"rhs has shape {rhs.shape}, expected ({inst.n},)")
    if not np.all(np.isfinite(rhs)):
        raise NonFinite("rhs has non-finite entries")
    if method == "auto":
        method = "dense" if inst.n <= DENSE_LIMIT else "cg"

    iterations = 0
    if method == "dense":
        p, res = _dense_solve(inst.A, x, rhs, solve_tol, cond_limit)
    elif method == "cg":
        p0 = warm.p if warm is not None else np.zeros(inst.n)
        if max_inner is None:
            max_inner = 10 * inst.n
        p, iterations, res = _kernels.pcg(
            inst.A, x, rhs, np.ascontiguousarray(p0, dtype=float),
            solve_tol, max_inner)
        if not res <= solve_tol:
            raise NoConvergence(res, iterations)
        # CG tracks a recursive residual; report the true one
        bnorm = np.linalg.norm(rhs)
        if bnorm > 0:
            res = np.linalg.norm(inst.A @ (x * (inst.A.T @ p)) - rhs) / bnorm
    else:
        raise ValueError(f"unknown linear solver method {method!r}")

    d = inst.A.T @ p
    return LaplacianSolve(p=p, d=d, q=x * d, residual_norm=float(res),
                          warm_state=WarmStart(p), method=method,
                          iterations=iterations)


def transfer_matrix(inst, x, small_limit=SMALL_LIMIT, cond_limit=COND_LIMIT):
    """``T(x) = A^T L(x)^-1 A`` as a dense ``m x m`` matrix (test-sized only)."""
    if inst.m > small_limit:
        raise SizeLimitExceeded(f"m={inst.m} exceeds small_limit={small_limit}")
    x = check_weights(x, inst.m)
    _, fac, scale = _factor(inst.A, x, cond_limit)
    Y = scale[:, None] * scipy.linalg.cho_solve(
        fac, scale[:, None] * inst.A, check_finite=False)
    T = inst.A.T @ Y
    return 0.5 * (T + T.T)
