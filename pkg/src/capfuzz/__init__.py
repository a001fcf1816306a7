"""Fuzzy clustering with weighted points and per-cluster capacity targets.

The membership step is a structured quadratic program solved exactly via
a reduced multiplier system (diagonal Schur elimination plus one small
dense solve), wrapped in a primal active-set method when the box
constraints bind.  Alternating that step with weighted-mean centroid
updates gives a monotone clustering loop; plain fuzzy c-means and the
unit-weight equal-capacity variant ship as baselines.
"""

from .clustering import (
    FitResult,
    InitStrategy,
    fit_capacitated,
    fit_equibalanced,
    fit_fcm,
    update_centroids,
)
from .core import (
    Centroids,
    MembershipMatrix,
    ProblemSpec,
    ValidatedProblem,
    feasible_init_membership,
    validate_problem,
)
from .data_io import (
    Dataset,
    equal_capacities,
    generate_synthetic,
    load_csv,
    load_wine,
    normalize_zscore,
    save_csv,
)
from .errors import (
    ActiveSetStall,
    CapacityMismatch,
    CapfuzzError,
    DimensionMismatch,
    EmptyCluster,
    EmptyData,
    InfeasibleBoxProblem,
    LengthMismatch,
    NonMonotoneObjective,
    NonPositiveCapacity,
    NonPositiveWeight,
    ParseError,
    RaggedRows,
    SingularReducedSystem,
    SolverError,
    UnexpectedRowCount,
    ValidationError,
)
from .metrics import adjusted_rand_index, capacity_residual, harden, objective
from .qp import (
    ActiveSetState,
    KktMultipliers,
    SquaredDistanceMatrix,
    build_squared_distances,
    kkt_residual,
    solve_box_qp,
    solve_equality_qp,
)

__version__ = "0.1.0"

__all__ = [
    "ActiveSetStall",
    "ActiveSetState",
    "CapacityMismatch",
    "CapfuzzError",
    "Centroids",
    "Dataset",
    "DimensionMismatch",
    "EmptyCluster",
    "EmptyData",
    "FitResult",
    "InfeasibleBoxProblem",
    "InitStrategy",
    "KktMultipliers",
    "LengthMismatch",
    "MembershipMatrix",
    "NonMonotoneObjective",
    "NonPositiveCapacity",
    "NonPositiveWeight",
    "ParseError",
    "ProblemSpec",
    "RaggedRows",
    "SingularReducedSystem",
    "SolverError",
    "SquaredDistanceMatrix",
    "UnexpectedRowCount",
    "ValidatedProblem",
    "ValidationError",
    "adjusted_rand_index",
    "build_squared_distances",
    "capacity_residual",
    "equal_capacities",
    "feasible_init_membership",
    "fit_capacitated",
    "fit_equibalanced",
    "fit_fcm",
    "generate_synthetic",
    "harden",
    "kkt_residual",
    "load_csv",
    "load_wine",
    "normalize_zscore",
    "objective",
    "save_csv",
    "solve_box_qp",
    "solve_equality_qp",
    "update_centroids",
    "validate_problem",
]
