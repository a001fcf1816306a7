"""Alternating-minimization fits: capacity-constrained, plain FCM, and the
unit-weight equal-capacity special case.

Each outer iteration recomputes squared distances at the current
centroids, solves the membership step exactly, then moves each centroid
to the membership-weighted mean.  Both half-steps minimize the shared
objective, so its trace can never increase; the loop asserts that and
raises if a bug or numerical collapse breaks it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    Centroids,
    MembershipMatrix,
    ProblemSpec,
    ValidatedProblem,
    validate_problem,
)
from .errors import EmptyCluster, NonMonotoneObjective, ValidationError
from .metrics import capacity_residual, objective
from .qp import build_squared_distances, solve_box_qp, solve_equality_qp

# Absolute slack allowed on the non-increasing objective check.
MONOTONE_SLACK = 1e-9


@dataclass(frozen=True)
class InitStrategy:
    """How to pick starting centroids.

    ``seeded-points`` draws distinct data points greedily, weighting
    each candidate by its point weight times squared distance to the
    nearest centroid already chosen; the draw is fully determined by
    ``rng_seed``.  ``user-provided`` uses ``centroids`` as given.
    """

    kind: str = "seeded-points"
    rng_seed: int = 0
    centroids: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("seeded-points", "user-provided"):
            raise ValidationError(f"unknown init kind {self.kind!r}")
        if self.kind == "user-provided" and self.centroids is None:
            raise ValidationError("user-provided init requires centroids")


@dataclass
class FitResult:
    """Outcome of one alternating fit."""

    memberships: MembershipMatrix
    centroids: Centroids
    objective_trace: list[float]
    capacity_residual_trace: list[float]
    iterations: int
    converged: bool
    clamp_events: int


def _initial_centroids(points: np.ndarray, g: int, weights: np.ndarray,
                       init: InitStrategy) -> np.ndarray:
    if init.kind == "user-provided":
        centroids = np.atleast_2d(np.asarray(init.centroids, dtype=float))
        if centroids.shape != (g, points.shape[1]):
            raise ValidationError(
                f"provided centroids have shape {centroids.shape}, "
                f"expected {(g, points.shape[1])}"
            )
        return centroids.copy()

    rng = np.random.default_rng(init.rng_seed)
    n = points.shape[0]
    if g > n:
        raise ValidationError(
            f"seeded-points init cannot draw {g} distinct points from {n}"
        )
    chosen = [int(rng.integers(n))]
    while len(chosen) < g:
        with np.errstate(over="ignore"):
            gaps = points[:, None, :] - points[chosen][None, :, :]
            nearest_sq = (gaps**2).sum(axis=2).min(axis=1)
            pull = weights * nearest_sq
        pull[chosen] = 0.0
        overflowed = np.isinf(pull)
        if overflowed.any():
            chosen.append(int(rng.choice(np.flatnonzero(overflowed))))
            continue
        total = pull.sum()
        if total > 0.0:
            chosen.append(int(rng.choice(n, p=pull / total)))
        else:
            remaining = np.setdiff1d(np.arange(n), chosen)
            chosen.append(int(rng.choice(remaining)))
    return points[chosen].astype(float)


def _clamp_floor(points: np.ndarray) -> float:
    with np.errstate(over="ignore"):
        span = points.max(axis=0) - points.min(axis=0)
        diameter = math.sqrt(float((span**2).sum()))
    if not math.isfinite(diameter):
        return 1.0
    return max((1e-9 * diameter) ** 2, 1e-300)


def update_centroids(u: MembershipMatrix, points, m: float) -> Centroids:
    """Move each centroid to its membership-weighted mean of the points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    powered = u.values**m
    mass = powered.sum(axis=1)
    if (mass < 1e-300).any():
        starved = int(np.argmin(mass))
        raise EmptyCluster(f"cluster {starved} has no membership mass")
    return Centroids(values=(powered @ points) / mass[:, None])


def _check_monotone(trace: list[float], value: float) -> None:
    if trace and value > trace[-1] + MONOTONE_SLACK:
        raise NonMonotoneObjective(
            f"objective rose from {trace[-1]!r} to {value!r}"
        )


def fit_capacitated(problem: ValidatedProblem, init: InitStrategy) -> FitResult:
    """Alternating minimization with the capacity-constrained membership step.

    Memberships come from the equality-constrained solve, escalated to
    the box-constrained solve only when some entry leaves ``[0, 1]`` by
    more than roundoff.  Stops when centroids move less than
    ``convergence_tol``, the relative objective change falls below it,
    or ``max_iterations`` is hit.
    """
    if problem.fuzzifier != 2.0:
        raise ValidationError(
            "the capacity-constrained membership step is only defined for fuzzifier 2"
        )
    points = problem.points
    z = problem.weights
    mu = problem.capacities
    centroids = _initial_centroids(points, problem.n_clusters, z, init)
    floor = _clamp_floor(points)

    objective_trace: list[float] = []
    residual_trace: list[float] = []
    clamp_events = 0
    membership = None
    converged = False

    for _ in range(problem.max_iterations):
        q = build_squared_distances(points, centroids, floor)
        clamp_events += q.clamped_count
        membership, _ = solve_equality_qp(q, z, mu)
        if not membership.box_feasible:
            membership, _, _ = solve_box_qp(q, z, mu)

        value = objective(membership, q, 2.0)
        _check_monotone(objective_trace, value)
        previous = objective_trace[-1] if objective_trace else None
        objective_trace.append(value)
        residual_trace.append(capacity_residual(membership, z, mu))

        moved = update_centroids(membership, points, 2.0)
        displacement = float(np.abs(moved.values - centroids).max())
        centroids = moved.values
        if displacement < problem.convergence_tol or (
            previous is not None
            and abs(previous - value) < problem.convergence_tol * (1.0 + value)
        ):
            converged = True
            break

    return FitResult(
        memberships=membership,
        centroids=Centroids(values=centroids),
        objective_trace=objective_trace,
        capacity_residual_trace=residual_trace,
        iterations=len(objective_trace),
        converged=converged,
        clamp_events=clamp_events,
    )


def fit_fcm(points, g: int, m: float, init: InitStrategy,
            weights=None, capacities=None,
            convergence_tol: float = 1e-6, max_iterations: int = 300) -> FitResult:
    """Classic unconstrained fuzzy c-means.

    Memberships follow the inverse-distance rule; a point sitting on a
    centroid gets full membership there (split equally over ties).  The
    capacity residual trace is reported against ``capacities`` (equal
    shares by default) purely as a diagnostic; nothing enforces it.
    """
    if m <= 1.0:
        raise ValidationError("fcm requires fuzzifier m > 1")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    if g < 1 or n < 1:
        raise ValidationError(f"need g >= 1 and n >= 1, got g={g}, n={n}")
    z = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    mu = (
        np.full(g, z.sum() / g)
        if capacities is None
        else np.asarray(capacities, dtype=float)
    )
    centroids = _initial_centroids(points, g, z, init)

    objective_trace: list[float] = []
    residual_trace: list[float] = []
    membership = None
    converged = False
    point_sq = (points**2).sum(axis=1)

    for _ in range(max_iterations):
        sq = np.maximum(
            (centroids**2).sum(axis=1)[:, None] + point_sq[None, :]
            - 2.0 * centroids @ points.T,
            0.0,
        )
        coincident = sq <= 0.0
        u = np.empty_like(sq)
        plain = ~coincident.any(axis=0)
        with np.errstate(divide="ignore"):
            inv = sq[:, plain] ** (-1.0 / (m - 1.0))
        u[:, plain] = inv / inv.sum(axis=0)
        if not plain.all():
            hit = coincident[:, ~plain]
            u[:, ~plain] = hit / hit.sum(axis=0)

        membership = MembershipMatrix(values=u, box_feasible=True)
        value = float(((u**m) * sq).sum())
        _check_monotone(objective_trace, value)
        previous = objective_trace[-1] if objective_trace else None
        objective_trace.append(value)
        residual_trace.append(capacity_residual(membership, z, mu))

        moved = update_centroids(membership, points, m)
        displacement = float(np.abs(moved.values - centroids).max())
        centroids = moved.values
        if displacement < convergence_tol or (
            previous is not None
            and abs(previous - value) < convergence_tol * (1.0 + value)
        ):
            converged = True
            break

    return FitResult(
        memberships=membership,
        centroids=Centroids(values=centroids),
        objective_trace=objective_trace,
        capacity_residual_trace=residual_trace,
        iterations=len(objective_trace),
        converged=converged,
        clamp_events=0,
    )


def fit_equibalanced(points, g: int, init: InitStrategy,
                     convergence_tol: float = 1e-6,
                     max_iterations: int = 300) -> FitResult:
    """Capacity-constrained fit with unit weights and equal capacities ``n/g``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    spec = ProblemSpec(
        points=points,
        weights=np.ones(n),
        capacities=np.full(g, n / g),
        convergence_tol=convergence_tol,
        max_iterations=max_iterations,
    )
    return fit_capacitated(validate_problem(spec), init)
