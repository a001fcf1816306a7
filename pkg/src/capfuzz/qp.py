"""Membership quadratic program for fuzzifier 2.

With centroids held fixed the membership step is

    minimize    sum_ij  u_ij^2 * q_ij
    subject to  sum_i u_ij = 1           (one equation per point)
                sum_j u_ij z_j = mu_i    (one equation per cluster)
                0 <= u_ij <= 1,

where ``q_ij`` is the clamped squared distance from point ``j`` to
centroid ``i``.  The Hessian is diagonal, so eliminating ``u`` from the
stationarity condition ``2 u_ij q_ij = alpha_j + beta_i z_j`` turns the
equality-constrained problem into a small multiplier system:

    [ diag(sum_i 1/q_ij)      (z_j / q_ij)        ] [alpha]   [2 * 1]
    [ (z_j / q_ij)^T          diag(sum_j z^2/q_ij)] [beta ] = [2 * mu]

The point block is diagonal, so a Schur complement reduces everything to
a dense symmetric system over the cluster multipliers.  The constraint
set carries one redundancy (capacity totals equal weight totals), which
is removed by pinning the last cluster multiplier to zero.  Assembly and
back-substitution are written in terms of the per-column shares
``P_ij = (1/q_ij) / sum_k (1/q_kj)`` with explicit exclusion sums: every
term is then single-signed, which keeps the solve accurate even when a
clamped near-zero distance makes one ``1/q`` entry twenty orders of
magnitude larger than its neighbours.  The naive ``S22 - S12^T S11^-1
S12`` form cancels catastrophically in exactly that case.

Box constraints are enforced by a primal active-set wrapper around the
same masked solve: walk from a feasible point toward the current
equality solution, pin the first bound that blocks, and at subspace
optima release the bound whose multiplier has the wrong sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MembershipMatrix
from .errors import (
    ActiveSetStall,
    DimensionMismatch,
    InfeasibleBoxProblem,
    SingularReducedSystem,
)

# Bound violations beyond this are treated as real (not roundoff); the
# alternating fit escalates from the equality path to the box path at
# the same threshold.
BOX_FEASIBILITY_TOL = 1e-12

# Relative ceiling on equality-constraint residuals of a solve; beyond it
# the instance is declared numerically collapsed.
RESIDUAL_TOL = 1e-10

_CHOLESKY_PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class SquaredDistanceMatrix:
    """Clamped squared point-to-centroid distances, the diagonal Hessian.

    Every entry is at least ``clamp_floor > 0`` so the membership QP is
    strictly convex; ``clamped_count`` records how many entries the
    floor actually raised.
    """

    values: np.ndarray
    clamp_floor: float
    clamped_count: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values, clamp_floor: float = 1e-300) -> "SquaredDistanceMatrix":
        """Wrap a raw matrix, applying the clamp floor entrywise."""
        if clamp_floor <= 0:
            raise ValueError("clamp_floor must be > 0")
        raw = np.atleast_2d(np.asarray(values, dtype=float))
        clamped = np.maximum(raw, clamp_floor)
        return cls(values=clamped, clamp_floor=float(clamp_floor),
                   clamped_count=int((raw < clamp_floor).sum()))


@dataclass(frozen=True)
class KktMultipliers:
    """Equality-constraint multipliers, scaled so that on free entries
    ``u_ij = (alpha_j + beta_i z_j) / (2 q_ij)``.

    The last entry of ``beta`` is gauge-fixed to zero to absorb the one
    redundant constraint.
    """

    alpha: np.ndarray
    beta: np.ndarray


@dataclass
class ActiveSetState:
    """Bound bookkeeping for the box-constrained solve.

    ``lower_active`` and ``upper_active`` are disjoint boolean masks of
    entries pinned at 0 and 1; the rest are free.  ``lower_multipliers``
    and ``upper_multipliers`` hold the bound multipliers, zero off their
    active set, so complementary slackness holds by construction.
    """

    lower_active: np.ndarray
    upper_active: np.ndarray
    lower_multipliers: np.ndarray
    upper_multipliers: np.ndarray

    @classmethod
    def all_free(cls, g: int, n: int) -> "ActiveSetState":
        return cls(
            lower_active=np.zeros((g, n), dtype=bool),
            upper_active=np.zeros((g, n), dtype=bool),
            lower_multipliers=np.zeros((g, n)),
            upper_multipliers=np.zeros((g, n)),
        )

    @property
    def free(self) -> np.ndarray:
        return ~(self.lower_active | self.upper_active)


def build_squared_distances(points, centroids, clamp_floor: float) -> SquaredDistanceMatrix:
    """Pairwise squared Euclidean distances, floored at ``clamp_floor``.

    The floor keeps the QP Hessian positive definite when a centroid
    lands exactly on a data point.
    """
    if clamp_floor <= 0:
        raise ValueError("clamp_floor must be > 0")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    centroids = np.atleast_2d(np.asarray(centroids, dtype=float))
    if points.shape[1] != centroids.shape[1]:
        raise DimensionMismatch(
            f"points have {points.shape[1]} features, centroids {centroids.shape[1]}"
        )
    # overflow to inf (and inf - inf = nan on the overflowed diagonal) is
    # tolerated here; nan is floored away and the solver rejects the
    # instance cleanly when all the inverses vanish
    with np.errstate(over="ignore", invalid="ignore"):
        sq = (
            (centroids**2).sum(axis=1)[:, None]
            + (points**2).sum(axis=1)[None, :]
            - 2.0 * centroids @ points.T
        )
        sq = np.where(np.isnan(sq), clamp_floor, sq)
    clamped = int((sq < clamp_floor).sum())
    return SquaredDistanceMatrix(
        values=np.maximum(sq, clamp_floor),
        clamp_floor=float(clamp_floor),
        clamped_count=clamped,
    )


def _exclusion_sum(rows: np.ndarray) -> np.ndarray:
    """Per-row sums of all other rows, without forming total - row."""
    out = np.empty_like(rows)
    g = rows.shape[0]
    for i in range(g):
        out[i] = rows[:i].sum(axis=0) + rows[i + 1:].sum(axis=0)
    return out


def _masked_equality_solve(qv, z, mu, lower, upper):
    """Equality-constrained solve with entries pinned at 0 or 1.

    Returns ``(u, alpha, beta)`` where pinned entries of ``u`` hold
    their bound values and free entries minimize the objective subject
    to the adjusted column and capacity sums.
    """
    g, n = qv.shape
    free = ~(lower | upper)
    with np.errstate(over="ignore"):
        inv_q = np.where(free, 1.0 / qv, 0.0)
    if not np.isfinite(inv_q).all():
        raise SingularReducedSystem(
            "an inverse squared distance overflowed; distances are numerically collapsed"
        )
    col_mass = inv_q.sum(axis=0)
    has_free = col_mass > 0.0
    col_target = 1.0 - upper.sum(axis=0)
    cap_target = mu - (upper * z[None, :]).sum(axis=1)

    if not has_free.all():
        gap = np.abs(col_target[~has_free]).max() if (~has_free).any() else 0.0
        if gap > 1e-9:
            raise SingularReducedSystem(
                "a point column has no free entries but an unmet sum constraint"
            )

    safe_mass = np.where(has_free, col_mass, 1.0)
    share = inv_q / safe_mass
    # exclusion sums: (col_mass - inv_q[i]) / col_mass computed directly
    # would lose all digits when one clamped entry dominates the column
    other_share = _exclusion_sum(share)

    weighted = (z**2)[None, :] * inv_q
    cross = weighted @ share.T
    reduced = -0.5 * (cross + cross.T)
    np.fill_diagonal(reduced, (weighted * other_share).sum(axis=1))
    rhs = 2.0 * cap_target - 2.0 * (share * (z * col_target)[None, :]).sum(axis=1)

    row_mass = weighted.sum(axis=1)
    active = np.flatnonzero(row_mass > 0.0)
    if active.size == 0:
        raise SingularReducedSystem("no free entries anywhere")
    inactive = row_mass <= 0.0
    if inactive.any() and np.abs(cap_target[inactive]).max() > 1e-9 * max(1.0, np.abs(mu).max()):
        raise SingularReducedSystem(
            "a cluster has no free entries but an unmet capacity constraint"
        )

    beta = np.zeros(g)
    if active.size >= 2:
        keep = active[:-1]  # gauge: last active cluster multiplier is zero
        block = reduced[np.ix_(keep, keep)]
        if not np.isfinite(block).all():
            raise SingularReducedSystem("reduced system contains non-finite values")
        try:
            chol = np.linalg.cholesky(block)
        except np.linalg.LinAlgError as exc:
            raise SingularReducedSystem(
                "reduced cluster system is not positive definite"
            ) from exc
        pivots = np.diagonal(chol) ** 2
        if (pivots < _CHOLESKY_PIVOT_RTOL * block.diagonal().max()).any():
            raise SingularReducedSystem("reduced cluster system pivot below tolerance")
        beta[keep] = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs[keep]))

    # u = P * (b + z/2 * sum_k (1/q_k)(beta_i - beta_k)); the k = i term
    # vanishes exactly, so no exclusion is needed here
    spread = np.empty_like(share)
    for i in range(g):
        spread[i] = ((beta[i] - beta)[:, None] * inv_q).sum(axis=0)
    u = share * (col_target[None, :] + 0.5 * z[None, :] * spread)
    u[upper] = 1.0

    alpha = np.where(has_free, 2.0 * col_target / safe_mass - z * (share.T @ beta), 0.0)

    col_res = np.abs(u.sum(axis=0) - 1.0).max()
    cap_res = (np.abs(u @ z - mu) / np.maximum(np.abs(mu), 1.0)).max()
    if max(col_res, cap_res) > RESIDUAL_TOL:
        raise SingularReducedSystem(
            f"constraint residual {max(col_res, cap_res):.3e} exceeds {RESIDUAL_TOL:g}; "
            "distances are numerically collapsed"
        )
    return u, alpha, beta


def solve_equality_qp(q: SquaredDistanceMatrix, z, mu):
    """Minimize the membership objective under the equality constraints only.

    Returns the unique minimizer (entries may leave ``[0, 1]``) and its
    multipliers.  Cost is O(n g^2) assembly plus one dense solve of
    order ``g - 1``.
    """
    qv = q.values
    z = np.asarray(z, dtype=float)
    mu = np.asarray(mu, dtype=float)
    g, n = qv.shape
    if z.shape != (n,) or mu.shape != (g,):
        raise DimensionMismatch(
            f"q is {g}x{n} but weights have shape {z.shape} and capacities {mu.shape}"
        )
    lower = np.zeros((g, n), dtype=bool)
    upper = np.zeros((g, n), dtype=bool)
    u, alpha, beta = _masked_equality_solve(qv, z, mu, lower, upper)
    feasible = bool(u.min() >= -BOX_FEASIBILITY_TOL and u.max() <= 1.0 + BOX_FEASIBILITY_TOL)
    return (
        MembershipMatrix(values=u, box_feasible=feasible),
        KktMultipliers(alpha=alpha, beta=beta),
    )


def solve_box_qp(q: SquaredDistanceMatrix, z, mu):
    """Minimize the membership objective with bounds enforced.

    Starts from the equality solution; if that already sits in the box
    it is returned unchanged with an empty active set.  Otherwise a
    primal active-set iteration walks a feasible iterate toward each
    successive subspace solution, pinning the most-violated blocking
    bound, and at subspace optima releasing the pinned bound with the
    most negative multiplier.  Strict convexity makes the working sets
    terminate; a cap of ``10 g n`` pivots guards the degenerate case.
    """
    qv = q.values
    z = np.asarray(z, dtype=float)
    mu = np.asarray(mu, dtype=float)
    g, n = qv.shape
    if z.shape != (n,) or mu.shape != (g,):
        raise DimensionMismatch(
            f"q is {g}x{n} but weights have shape {z.shape} and capacities {mu.shape}"
        )
    total = float(z.sum())
    if mu.min() < 0 or mu.max() > total * (1.0 + 1e-9):
        raise InfeasibleBoxProblem(
            f"capacities must lie in [0, sum(z)={total:g}] to be reachable with u in [0, 1]"
        )

    state = ActiveSetState.all_free(g, n)
    u_hat, alpha, beta = _masked_equality_solve(qv, z, mu, state.lower_active, state.upper_active)
    if u_hat.min() >= -BOX_FEASIBILITY_TOL and u_hat.max() <= 1.0 + BOX_FEASIBILITY_TOL:
        return (
            MembershipMatrix(values=u_hat, box_feasible=True),
            KktMultipliers(alpha=alpha, beta=beta),
            state,
        )

    lower = state.lower_active
    upper = state.upper_active
    multiplier_tol = 1e-11 * (1.0 + 2.0 * float(qv.max()))
    # interior feasible start; the walk keeps every iterate feasible
    x = np.broadcast_to((mu / mu.sum())[:, None], (g, n)).copy()

    for _ in range(10 * g * n):
        direction = u_hat - x
        free = ~(lower | upper)
        moving = free & (np.abs(direction) > 1e-13)
        toward_zero = moving & (direction < 0)
        toward_one = moving & (direction > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            step_zero = np.where(toward_zero, x / -direction, np.inf)
            step_one = np.where(toward_one, (1.0 - x) / direction, np.inf)
        step_limit = np.minimum(step_zero, step_one)
        first_block = step_limit.min()

        if first_block < 1.0:
            # among bounds blocking at (numerically) the same step, pin
            # the one the full equality target violates hardest
            blocking = step_limit <= first_block + 1e-12
            severity = np.where(blocking & toward_zero, -u_hat, -np.inf)
            severity = np.maximum(
                severity, np.where(blocking & toward_one, u_hat - 1.0, -np.inf)
            )
            idx = np.unravel_index(np.argmax(severity), severity.shape)
            x += first_block * direction
            if direction[idx] < 0:
                lower[idx] = True
                x[idx] = 0.0
            else:
                upper[idx] = True
                x[idx] = 1.0
            np.clip(x, 0.0, 1.0, out=x)
        else:
            x = u_hat.copy()
            linear = alpha[None, :] + beta[:, None] * z[None, :]
            gamma = np.where(lower, -linear, np.inf)
            delta = np.where(upper, linear - 2.0 * qv, np.inf)
            worst = min(gamma.min(), delta.min())
            if worst >= -multiplier_tol:
                state.lower_multipliers = np.where(lower, np.maximum(gamma, 0.0), 0.0)
                state.upper_multipliers = np.where(upper, np.maximum(delta, 0.0), 0.0)
                return (
                    MembershipMatrix(values=u_hat, box_feasible=True),
                    KktMultipliers(alpha=alpha, beta=beta),
                    state,
                )
            if gamma.min() <= delta.min():
                lower[np.unravel_index(np.argmin(gamma), gamma.shape)] = False
            else:
                upper[np.unravel_index(np.argmin(delta), delta.shape)] = False

        u_hat, alpha, beta = _masked_equality_solve(qv, z, mu, lower, upper)

    raise ActiveSetStall(f"no optimal active set within {10 * g * n} pivots")


def kkt_residual(u: MembershipMatrix, mult: KktMultipliers, state: ActiveSetState,
                 q: SquaredDistanceMatrix, z, mu) -> float:
    """Worst absolute violation across all optimality condition families.

    Checks stationarity, both equality families, the bounds, multiplier
    signs, and complementary slackness; purely diagnostic.
    """
    uv = u.values
    qv = q.values
    z = np.asarray(z, dtype=float)
    mu = np.asarray(mu, dtype=float)
    g, n = qv.shape
    if uv.shape != (g, n) or z.shape != (n,) or mu.shape != (g,):
        raise DimensionMismatch("membership, distance, weight, capacity shapes disagree")
    gamma = state.lower_multipliers
    delta = state.upper_multipliers

    stationarity = np.abs(
        2.0 * uv * qv - mult.alpha[None, :] - mult.beta[:, None] * z[None, :]
        - gamma + delta
    ).max()
    column_sums = np.abs(uv.sum(axis=0) - 1.0).max()
    capacities = np.abs(uv @ z - mu).max()
    bounds = max(0.0, float(-uv.min()), float(uv.max() - 1.0))
    dual_signs = max(0.0, float(-gamma.min()), float(-delta.min()))
    slackness = max(np.abs(gamma * uv).max(), np.abs(delta * (uv - 1.0)).max())
    return float(max(stationarity, column_sums, capacities, bounds, dual_signs, slackness))
