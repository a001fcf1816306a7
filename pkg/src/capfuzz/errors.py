"""Exception taxonomy.

Two branches matter to callers: ``ValidationError`` covers bad inputs
(CLI exit code 2) and ``SolverError`` covers numerical failures during a
solve (CLI exit code 3).
"""


class CapfuzzError(Exception):
    """Base class for all library errors."""


class ValidationError(CapfuzzError):
    """Invalid input data or configuration."""


class SolverError(CapfuzzError):
    """Numerical failure inside a solver."""


class EmptyData(ValidationError):
    """No points, no features, or no clusters."""


class NonPositiveWeight(ValidationError):
    """A point weight is zero or negative."""


class NonPositiveCapacity(ValidationError):
    """A cluster capacity is zero or negative."""


class CapacityMismatch(ValidationError):
    """Total capacity does not match total point weight within tolerance."""


class DimensionMismatch(ValidationError):
    """Array shapes do not agree."""


class LengthMismatch(ValidationError):
    """Paired vectors have different lengths."""


class ParseError(ValidationError):
    """A file cell could not be parsed; message names row and column."""


class RaggedRows(ParseError):
    """A data row has a different number of cells than the header."""


class SingularReducedSystem(SolverError):
    """The reduced multiplier system collapsed numerically.

    Usually means distances degenerated beyond what clamping can absorb,
    or a masked subproblem became inconsistent.
    """


class InfeasibleBoxProblem(SolverError):
    """Capacity targets cannot be met with memberships in [0, 1]."""


class ActiveSetStall(SolverError):
    """Active-set iteration cap reached without convergence."""


class EmptyCluster(SolverError):
    """A cluster lost all membership mass during a centroid update."""


class NonMonotoneObjective(SolverError):
    """Internal check failed: the objective increased between iterations."""


class UnexpectedRowCount(UserWarning):
    """A dataset file had a surprising number of rows; parsing continued."""
