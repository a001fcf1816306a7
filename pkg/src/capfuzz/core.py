"""Problem instances: validation and the closed-form feasible start.

A problem couples an ``n x d`` point cloud with positive per-point
weights ``z`` and positive per-cluster capacity targets ``mu``.  A
membership matrix ``u`` (clusters by points) is feasible when every
column sums to one, every weighted row sum hits its capacity, and all
entries lie in ``[0, 1]``.  Feasibility requires the capacity totals to
match the weight totals, which :func:`validate_problem` checks and then
enforces exactly by rescaling the capacities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CapacityMismatch,
    EmptyData,
    NonPositiveCapacity,
    NonPositiveWeight,
    ValidationError,
)


def _frozen_array(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ProblemSpec:
    """Raw, not-yet-validated problem instance.

    Attributes
    ----------
    points : (n, d) array of feature vectors.
    weights : (n,) positive per-point weights (demand units).
    capacities : (g,) positive per-cluster capacity targets, same units
        as the weights.
    fuzzifier : membership exponent; the capacity-constrained membership
        step is only defined for 2.
    feasibility_tol : relative tolerance on the capacity/weight total
        match and on constraint satisfaction checks.
    convergence_tol : stopping tolerance for the alternating fit.
    max_iterations : iteration cap for the alternating fit.
    """

    points: np.ndarray
    weights: np.ndarray
    capacities: np.ndarray
    fuzzifier: float = 2.0
    feasibility_tol: float = 1e-9
    convergence_tol: float = 1e-6
    max_iterations: int = 300

    def __post_init__(self):
        object.__setattr__(self, "points", _frozen_array(np.atleast_2d(self.points)))
        object.__setattr__(self, "weights", _frozen_array(self.weights))
        object.__setattr__(self, "capacities", _frozen_array(self.capacities))


@dataclass(frozen=True)
class ValidatedProblem:
    """A checked instance whose capacity total equals the weight total.

    Produced by :func:`validate_problem`; capacities are rescaled by
    ``sum(z) / sum(mu)`` so the totals match to the last bit, which
    keeps the equality constraints of the membership step consistent.
    """

    points: np.ndarray
    weights: np.ndarray
    capacities: np.ndarray
    fuzzifier: float
    feasibility_tol: float
    convergence_tol: float
    max_iterations: int

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def n_features(self) -> int:
        return self.points.shape[1]

    @property
    def n_clusters(self) -> int:
        return self.capacities.shape[0]


@dataclass(frozen=True)
class MembershipMatrix:
    """Degrees of association, one row per cluster, one column per point.

    ``box_feasible`` is False for intermediates that satisfy the equality
    constraints but stray outside ``[0, 1]``.
    """

    values: np.ndarray
    box_feasible: bool = True

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))

    @property
    def n_clusters(self) -> int:
        return self.values.shape[0]

    @property
    def n_points(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Centroids:
    """Cluster centers, one row per cluster."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(np.atleast_2d(self.values)))


def validate_problem(spec: ProblemSpec) -> ValidatedProblem:
    """Check a problem instance and normalize its capacities.

    Raises
    ------
    EmptyData
        No points, no features, or no clusters.
    NonPositiveWeight, NonPositiveCapacity
        A weight or capacity is not strictly positive.
    CapacityMismatch
        Capacity total differs from weight total by more than
        ``feasibility_tol`` relative.
    ValidationError
        Fewer points than clusters, shape disagreements, or a
        non-finite value.
    """
    points = np.asarray(spec.points, dtype=float)
    weights = np.asarray(spec.weights, dtype=float)
    capacities = np.asarray(spec.capacities, dtype=float)

    if points.ndim != 2:
        raise ValidationError(f"points must be 2-D, got shape {points.shape}")
    n, d = points.shape
    g = capacities.shape[0]
    if n == 0 or d == 0 or g == 0:
        raise EmptyData(f"need n >= 1, d >= 1, g >= 1; got n={n}, d={d}, g={g}")
    if weights.shape != (n,):
        raise ValidationError(f"weights shape {weights.shape} does not match n={n}")
    if not np.isfinite(points).all():
        raise ValidationError("points contain non-finite values")
    if not np.isfinite(weights).all() or (weights <= 0).any():
        raise NonPositiveWeight("all point weights must be finite and > 0")
    if not np.isfinite(capacities).all() or (capacities <= 0).any():
        raise NonPositiveCapacity("all cluster capacities must be finite and > 0")
    if n < g:
        raise ValidationError(f"need at least as many points as clusters (n={n}, g={g})")

    total_weight = float(weights.sum())
    total_capacity = float(capacities.sum())
    if abs(total_capacity - total_weight) > spec.feasibility_tol * total_weight:
        raise CapacityMismatch(
            f"capacity total {total_capacity:g} != weight total {total_weight:g} "
            f"(relative gap {abs(total_capacity - total_weight) / total_weight:.3e}, "
            f"tolerance {spec.feasibility_tol:g})"
        )

    # Rescale so the totals agree exactly; a residual mismatch at the
    # validation tolerance would otherwise leak into every membership solve.
    capacities = capacities * (total_weight / total_capacity)
    return ValidatedProblem(
        points=_frozen_array(points),
        weights=_frozen_array(weights),
        capacities=_frozen_array(capacities),
        fuzzifier=float(spec.fuzzifier),
        feasibility_tol=float(spec.feasibility_tol),
        convergence_tol=float(spec.convergence_tol),
        max_iterations=int(spec.max_iterations),
    )


def feasible_init_membership(problem: ValidatedProblem) -> MembershipMatrix:
    """Closed-form interior point of the constraint polytope.

    Assigns every point the same column ``mu / sum(mu)``.  Column sums
    are one by construction and, because the capacity total equals the
    weight total, every weighted row sum lands exactly on its capacity.
    """
    shares = problem.capacities / problem.capacities.sum()
    values = np.broadcast_to(shares[:, None], (problem.n_clusters, problem.n_points))
    return MembershipMatrix(values=values.copy(), box_feasible=True)
