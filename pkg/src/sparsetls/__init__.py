"""Sparse recovery for underdetermined linear models with perturbation in
both the measurements and the dictionary.

Solvers: TLS-FOCUSS, SD-FOCUSS (single and multiple measurement vectors),
standard/regularized FOCUSS baselines and (S)OMP, plus a seedable Monte
Carlo benchmark harness and CLI.
"""

__version__ = "0.1.0"

from .errors import (
    DegenerateSolution,
    DimensionMismatch,
    InvalidParam,
    NonConvergence,
    NotPositiveDefinite,
    RankDeficient,
    SparseTlsError,
)
from .linalg import (
    EigenPair,
    SymOperator,
    dominant_eigenpair,
    min_norm_solution,
    spd_solve,
)
from .params import SolveResult, SolverParams, derive_gamma_alpha
from .baseline import (
    mmv_focuss,
    mmv_regularized_focuss,
    omp,
    regularized_focuss,
    reweight_matrix,
    somp,
    standard_focuss,
)
from .tls import (
    AugmentedSystem,
    build_augmented,
    extract_x,
    initial_z,
    objective_J,
    phi_operator,
    tls_focuss,
)
from .sd import (
    PerturbEstimate,
    estimate_E,
    mmv_estimate_E,
    mmv_sd_focuss,
    mmv_weights,
    sd_focuss,
)
from .experiments import (
    ExperimentSummary,
    ProblemInstance,
    TrialConfig,
    amplitude_rmse,
    generate_problem,
    relative_mse,
    run_monte_carlo,
    support_success,
)

__all__ = [name for name in dir() if not name.startswith("_")]
