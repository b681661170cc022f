"""Iterative schemes minimizing the dissipation potential over ``x >= delta``.

* ``pgs``  -- entropic mirror descent (multiplicative weights):
  ``x_j <- max(delta, x_j exp(-g_j / beta))``.
* ``ags``  -- Nesterov's accelerated scheme with Euclidean projections.
* ``ags2`` -- the accelerated scheme with coordinate-scaled (entropic-style)
  steps and a constant mixing weight.

Every iteration costs one Laplacian solve for the gradient; the induced
solution ``q(x)`` of that solve is the reported primal iterate, and one more
solve certifies it with a duality gap.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .dissipation import c_const, delta_floor, duality_gap, least_squares_solution, potential
from .errors import (
    DimensionMismatch,
    IllConditioned,
    InvalidEps,
    NoConvergence,
    NonFinite,
    StepOverflow,
)
from .laplacian import COND_LIMIT, SOLVE_TOL

log = logging.getLogger(__name__)

VARIANTS = ("pgs", "ags", "ags2")
THEORETICAL = "theoretical"

PRACTICAL_BETA = {"pgs": 3.5, "ags": 3.5, "ags2": 1.1}
PRACTICAL_DELTA = 1e-15
AGS2_TAU = 1e-15
DEFAULT_MAX_ITERS = 10_000
EXP_GUARD = 700.0


class RunStatus(str, enum.Enum):
    GAP_REACHED = "GapReached"
    MAX_ITERS = "MaxIters"
    ERROR = "Error"


def _variant(v):
    v = str(v).lower()
    if v not in VARIANTS:
        raise ValueError(f"unknown solver variant {v!r}; expected one of {VARIANTS}")
    return v


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    ``beta`` and ``delta`` accept a positive number, ``"theoretical"`` (the
    worst-case values that carry the convergence guarantees) or ``None`` for
    the practical defaults (``beta`` 3.5 / 3.5 / 1.1 for pgs / ags / ags2,
    ``delta`` 1e-15). ``max_iters`` accepts an int or ``"theoretical"``.
    ``init`` is ``"least_squares"``, ``"ones"`` or a weight vector. ``tau``
    is the constant mixing weight of ags2.
    """

    variant: str = "pgs"
    eps: float = 0.1
    beta: float | str | None = None
    delta: float | str | None = None
    max_iters: int | str = DEFAULT_MAX_ITERS
    gap_tol: float = 1e-8
    init: str | np.ndarray = "least_squares"
    solve_tol: float = SOLVE_TOL
    trace_every: int = 1
    tau: float = AGS2_TAU
    linear_solver: str = "auto"
    cond_limit: float = COND_LIMIT

    def __post_init__(self):
        object.__setattr__(self, "variant", _variant(self.variant))
        if not 0 < self.eps < 1:
            raise InvalidEps(f"eps must lie in (0, 1), got {self.eps}")
        for name in ("beta", "delta"):
            val = getattr(self, name)
            if val is not None and val != THEORETICAL and not float(val) > 0:
                raise ValueError(f"{name} must be positive, got {val}")
        if self.max_iters != THEORETICAL and int(self.max_iters) < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.gap_tol < 0:
            raise ValueError("gap_tol must be nonnegative")
        if self.trace_every < 1:
            raise ValueError("trace_every must be at least 1")
        if not 0 <= self.tau <= 1:
            raise ValueError("tau must lie in [0, 1]")
        if isinstance(self.init, str) and self.init not in ("least_squares", "ones"):
            raise ValueError(f"unknown init {self.init!r}")

    def resolve(self, inst):
        """Concrete ``(beta, delta, max_iters)`` for ``inst``."""
        if self.beta is None:
            beta = PRACTICAL_BETA[self.variant]
        elif self.beta == THEORETICAL:
            beta = default_beta(self.variant, inst, self.eps)
        else:
            beta = float(self.beta)
        if self.delta is None:
            delta = PRACTICAL_DELTA
        elif self.delta == THEORETICAL:
            delta = delta_floor(inst, self.eps)
        else:
            delta = float(self.delta)
        if self.max_iters == THEORETICAL:
            iters = theoretical_iters(self.variant, inst, self.eps)
        else:
            iters = int(self.max_iters)
        return beta, delta, iters

    def echo(self):
        out = {}
        for k in self.__dataclass_fields__:
            v = getattr(self, k)
            out[k] = v.tolist() if isinstance(v, np.ndarray) else v
        return out


@dataclass(frozen=True)
class AgsState:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    cumulative_gradient: np.ndarray
    k: int
    x0: np.ndarray

    @classmethod
    def start(cls, x0):
        x0 = np.asarray(x0, dtype=float)
        return cls(x=x0, y=x0, z=x0, cumulative_gradient=np.zeros_like(x0),
                   k=0, x0=x0)


@dataclass(frozen=True)
class IterationRecord:
    k: int
    f: float
    l1: float
    gap: float
    elapsed: float


@dataclass
class SolverRun:
    final_x: np.ndarray
    final_s: np.ndarray
    f: float
    certificate: object  # DualCertificate
    status: RunStatus
    iterations: int
    trace: list = field(default_factory=list)
    initial: IterationRecord | None = None
    params: dict = field(default_factory=dict)
    elapsed: float = 0.0
    message: str = ""
    error: Exception | None = None

    @property
    def breakdown(self):
        """True when the run ended on a failed linear solve."""
        return isinstance(self.error, (IllConditioned, NoConvergence))

    @property
    def l1(self):
        return float(np.abs(self.final_s).sum())

    @property
    def gap(self):
        return self.certificate.gap


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------

def default_beta(variant, inst, eps):
    """Smoothness constants behind the worst-case rates.

    pgs: ``8 m^2 / eps^2`` (smoothness relative to the negative entropy).
    ags, ags2: ``16 m^3 / (eps^3 sqrt(c))`` (Lipschitz constant of the
    gradient on ``x >= delta``); ags2 has no guarantee of its own.
    """
    variant = _variant(variant)
    if not 0 < eps < 1:
        raise InvalidEps(f"eps must lie in (0, 1), got {eps}")
    m = inst.m
    if variant == "pgs":
        return 8.0 * m ** 2 / eps ** 2
    return 16.0 * m ** 3 / (eps ** 3 * math.sqrt(c_const(inst)))


def theoretical_iters(variant, inst, eps):
    variant = _variant(variant)
    if not 0 < eps < 1:
        raise InvalidEps(f"eps must lie in (0, 1), got {eps}")
    m = inst.m
    if variant == "pgs":
        val = 96.0 * m ** 2 * math.log(m / eps) / eps ** 3
    else:
        val = 24.0 * m ** 2 / eps ** 2
    # guard against 384.00000000000006 -> 385
    return int(math.ceil(round(val, 9)))


def init_point(inst, config, delta=None):
    if delta is None:
        delta = config.resolve(inst)[1]
    init = config.init
    if isinstance(init, str):
        if init == "least_squares":
            return np.maximum(np.abs(least_squares_solution(inst)), delta)
        return np.full(inst.m, max(1.0, delta))
    x = np.asarray(init, dtype=float)
    if x.shape != (inst.m,):
        raise DimensionMismatch(f"custom init has shape {x.shape}, expected ({inst.m},)")
    if not np.all(np.isfinite(x)):
        raise NonFinite("custom init has non-finite entries")
    return np.maximum(x, delta)


# ---------------------------------------------------------------------------
# Steps
# ---------------------------------------------------------------------------

def pgs_step(inst, x, beta, delta, g=None, **solve_kw):
    """One multiplicative-weights step ``x_j exp(-g_j/beta)``, floored at delta."""
    x = np.asarray(x, dtype=float)
    if g is None:
        g = potential(inst, x, **solve_kw).gradient
    worst = float(np.max(np.abs(g))) / beta
    if not worst <= EXP_GUARD:
        raise StepOverflow(
            f"step exponent |grad|/beta = {worst:.3e} exceeds {EXP_GUARD}; "
            "beta is far below the smoothness scale")
    return _kernels.pgs_update(x, g, 1.0 / beta, delta)


def _accelerated(inst, state, beta, delta, tau, entropic, g, solve_kw):
    if g is None:
        g = potential(inst, state.x, **solve_kw).gradient
    alpha = (state.k + 1) / 2.0
    y, z, x_next, cum = _kernels.ags_update(
        state.x, state.x0, g, state.cumulative_gradient,
        alpha, 1.0 / beta, delta, tau, entropic)
    return replace(state, x=x_next, y=y, z=z, cumulative_gradient=cum,
                   k=state.k + 1)


def ags_step(inst, state, beta, delta, g=None, **solve_kw):
    """Accelerated step with ``alpha_k = (k+1)/2`` and ``tau_k = 2/(k+3)``."""
    tau = 2.0 / (state.k + 3)
    return _accelerated(inst, state, beta, delta, tau, False, g, solve_kw)


def ags2_step(inst, state, beta, delta, tau=AGS2_TAU, g=None, **solve_kw):
    """Accelerated step with steps scaled by ``x^k`` (for y) and ``x^0``
    (for z), and constant mixing weight ``tau``."""
    return _accelerated(inst, state, beta, delta, tau, True, g, solve_kw)


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

_RECOVERABLE = (IllConditioned, NoConvergence, StepOverflow)


def _evaluate(inst, x, warm, solve_kw, notes, k):
    # Exceeding cond_limit is reported once and then ignored for the rest of
    # the run: near a degenerate optimum L(x) is badly conditioned while q(x)
    # and the certificate stay accurate. A factorization breakdown (infinite
    # estimate) still propagates.
    try:
        return potential(inst, x, warm=warm, **solve_kw)
    except IllConditioned as exc:
        if not np.isfinite(exc.estimate):
            raise
        notes.append(f"iteration {k}: {exc}; condition check disabled")
        log.info("iteration %d: %s; continuing without condition check", k, exc)
        solve_kw["cond_limit"] = np.inf
        return potential(inst, x, warm=warm, **solve_kw)


def solve(inst, config=None, **overrides):
    """Run one scheme from its initial point until the gap or budget test.

    Stops with ``GapReached`` once ``gap <= gap_tol * ||q(x^k)||_1`` at a
    trace point, or ``MaxIters`` after the budget. Numerical failures after
    the first evaluation end the run with status ``Error``, keeping the last
    good iterate and the trace so far.

    The trace holds one record per ``trace_every`` iterations, ``k = 1..K``;
    the initial point is kept in ``run.initial``.
    """
    if config is None:
        config = SolverConfig(**overrides)
    elif overrides:
        config = replace(config, **overrides)
    beta, delta, budget = config.resolve(inst)
    variant = config.variant
    solve_kw = dict(solve_tol=config.solve_tol, method=config.linear_solver,
                    cond_limit=config.cond_limit)
    gap_kw = dict(solve_tol=config.solve_tol, method=config.linear_solver)
    params = dict(variant=variant, beta=beta, delta=delta, max_iters=budget,
                  tau=config.tau if variant == "ags2" else None,
                  eps=config.eps, gap_tol=config.gap_tol)

    notes = []
    t0 = time.perf_counter()
    x = init_point(inst, config, delta)
    ev = _evaluate(inst, x, None, solve_kw, notes, 0)
    cert = duality_gap(inst, x, q=ev.q, **gap_kw)
    initial = IterationRecord(0, ev.f, cert.l1, cert.gap, time.perf_counter() - t0)
    state = AgsState.start(x) if variant != "pgs" else None

    def finish(status, k, message="", error=None):
        return SolverRun(final_x=x, final_s=ev.q, f=ev.f, certificate=cert,
                         status=status, iterations=k, trace=trace,
                         initial=initial, params=params,
                         elapsed=time.perf_counter() - t0,
                         message="; ".join(notes + [message] if message else notes),
                         error=error)

    trace = []
    if cert.gap <= config.gap_tol * cert.l1:
        trace.append(initial)
        return finish(RunStatus.GAP_REACHED, 0)

    warm = ev.solve.warm_state
    k = 0
    for k in range(1, budget + 1):
        try:
            if variant == "pgs":
                x_next = pgs_step(inst, x, beta, delta, g=ev.gradient)
            elif variant == "ags":
                state = ags_step(inst, state, beta, delta, g=ev.gradient)
                x_next = state.x
            else:
                state = ags2_step(inst, state, beta, delta, tau=config.tau,
                                  g=ev.gradient)
                x_next = state.x
            ev_next = _evaluate(inst, x_next, warm, solve_kw, notes, k)
            record = k % config.trace_every == 0 or k == budget
            cert_next = (duality_gap(inst, x_next, q=ev_next.q, warm=warm, **gap_kw)
                         if record else cert)
        except _RECOVERABLE as exc:
            log.warning("%s stopped at iteration %d: %s", variant, k, exc)
            return finish(RunStatus.ERROR, k - 1, str(exc), exc)
        x, ev, warm = x_next, ev_next, ev_next.solve.warm_state
        if record:
            cert = cert_next
            trace.append(IterationRecord(k, ev.f, cert.l1, cert.gap,
                                         time.perf_counter() - t0))
            if cert.gap <= config.gap_tol * cert.l1:
                return finish(RunStatus.GAP_REACHED, k)
    return finish(RunStatus.MAX_ITERS, k)
