"""Basis pursuit by minimizing a Laplacian dissipation potential."""

from .dissipation import (
    DualCertificate,
    PotentialEval,
    bregman_entropy,
    c_const,
    delta_floor,
    duality_gap,
    gradient,
    hessian,
    l1_variational_check,
    potential,
)
from .instance import (
    BpInstance,
    FoldMap,
    duplicate_columns,
    fold_solution,
    incidence_reduced,
    load_instance,
    random_instance,
    save_instance,
    validate,
)
from .laplacian import LaplacianSolve, laplacian_matrix, solve_system, transfer_matrix
from .oracle import OracleResult, brute_force_bp, fd_gradient, fd_hessian
from .solvers import (
    AgsState,
    RunStatus,
    SolverConfig,
    SolverRun,
    ags2_step,
    ags_step,
    default_beta,
    init_point,
    pgs_step,
    solve,
    theoretical_iters,
)

__version__ = "0.1.0"
