import time

import numpy as np
import pytest

from capfuzz import (
    ActiveSetState,
    DimensionMismatch,
    InfeasibleBoxProblem,
    KktMultipliers,
    MembershipMatrix,
    SingularReducedSystem,
    SquaredDistanceMatrix,
    build_squared_distances,
    kkt_residual,
    solve_box_qp,
    solve_equality_qp,
)
from oracles import dense_kkt_solve, projected_gradient_box_solve, random_instance

ONES2 = np.ones(2)


def qmat(values):
    return SquaredDistanceMatrix.from_values(np.asarray(values, dtype=float))


class TestBuildSquaredDistances:
    def test_three_four_five(self):
        q = build_squared_distances([[0.0, 0.0]], [[3.0, 4.0]], 1e-18)
        assert q.values[0, 0] == pytest.approx(25.0)
        assert q.clamped_count == 0

    def test_coincident_point_clamped_and_flagged(self):
        q = build_squared_distances([[1.0, 2.0]], [[1.0, 2.0]], 1e-18)
        assert q.values[0, 0] == 1e-18
        assert q.clamped_count == 1

    def test_one_dimensional_difference(self):
        q = build_squared_distances([[1.0]], [[-1.0]], 1e-18)
        assert q.values[0, 0] == pytest.approx(4.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            build_squared_distances(np.zeros((3, 2)), np.zeros((2, 3)), 1e-18)


class TestEqualityQP:
    def test_single_cluster_forced_to_ones(self):
        q = qmat([[2.0, 5.0, 0.5]])
        z = np.array([1.0, 2.0, 0.5])
        u, mult = solve_equality_qp(q, z, np.array([z.sum()]))
        np.testing.assert_allclose(u.values, 1.0, atol=1e-12)
        assert mult.beta[-1] == 0.0

    def test_full_symmetry_gives_halves(self):
        u, _ = solve_equality_qp(qmat(np.ones((2, 2))), ONES2, ONES2)
        np.testing.assert_allclose(u.values, 0.5, atol=1e-12)

    def test_one_free_scalar_instance(self):
        # constraints leave a single free scalar t = u11 = u22 minimizing
        # 2 t^2 + 8 (1-t)^2, so t = 0.8
        u, _ = solve_equality_qp(qmat([[1.0, 4.0], [4.0, 1.0]]), ONES2, ONES2)
        np.testing.assert_allclose(u.values, [[0.8, 0.2], [0.2, 0.8]], atol=1e-12)
        assert u.box_feasible

    def test_matches_dense_saddle_oracle(self):
        rng = np.random.default_rng(1234)
        worst = 0.0
        for _ in range(200):
            qv, z, mu = random_instance(rng)
            u, _ = solve_equality_qp(SquaredDistanceMatrix.from_values(qv), z, mu)
            worst = max(worst, np.abs(u.values - dense_kkt_solve(qv, z, mu)).max())
        assert worst <= 1e-8

    def test_multipliers_reconstruct_memberships(self):
        rng = np.random.default_rng(5)
        qv, z, mu = random_instance(rng)
        q = SquaredDistanceMatrix.from_values(qv)
        u, mult = solve_equality_qp(q, z, mu)
        rebuilt = (mult.alpha[None, :] + mult.beta[:, None] * z[None, :]) / (2.0 * qv)
        np.testing.assert_allclose(rebuilt, u.values, atol=1e-10)

    def test_scaling_equivariance(self):
        rng = np.random.default_rng(77)
        qv, z, mu = random_instance(rng)
        u_base, mult_base = solve_equality_qp(SquaredDistanceMatrix.from_values(qv), z, mu)
        for kappa in (3.7, 0.2, 140.0):
            u_scaled, mult_scaled = solve_equality_qp(
                SquaredDistanceMatrix.from_values(kappa * qv), z, mu
            )
            assert np.abs(u_scaled.values - u_base.values).max() <= 1e-10
            np.testing.assert_allclose(mult_scaled.alpha, kappa * mult_base.alpha,
                                       rtol=1e-9, atol=1e-12)

    def test_weight_capacity_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            solve_equality_qp(qmat(np.ones((2, 3))), ONES2, ONES2)

    def test_collapsed_distances_raise(self):
        # subnormal distance below the clamp floor: 1/q overflows and the
        # reduced system is gone
        qv = np.array([[1e-320, 1.0], [1.0, 1.0]])
        q = SquaredDistanceMatrix.from_values(qv, clamp_floor=1e-321)
        with pytest.raises(SingularReducedSystem):
            solve_equality_qp(q, ONES2, ONES2)

    def test_extreme_but_representable_clamp_still_solves(self):
        # a 1e300 dynamic range in 1/q stays accurate in the share-based assembly
        qv = np.array([[1e-300, 1.0], [1.0, 1.0]])
        u, _ = solve_equality_qp(qmat(qv), ONES2, ONES2)
        assert np.abs(u.values.sum(axis=0) - 1.0).max() <= 1e-10
        assert np.abs(u.values @ ONES2 - ONES2).max() <= 1e-10


class TestBoxQP:
    def test_interior_solution_returned_unchanged(self):
        q = qmat([[1.0, 4.0], [4.0, 1.0]])
        u_eq, _ = solve_equality_qp(q, ONES2, ONES2)
        u_box, _, state = solve_box_qp(q, ONES2, ONES2)
        np.testing.assert_array_equal(u_box.values, u_eq.values)
        assert not state.lower_active.any() and not state.upper_active.any()

    def test_clipped_single_scalar_instance(self):
        # feasible interval for the free scalar is [0.9, 1]; the
        # unconstrained minimizer 1.44 clips to 1
        q = qmat([[0.01, 1.0], [1.0, 0.01]])
        u, _, state = solve_box_qp(q, ONES2, np.array([1.9, 0.1]))
        np.testing.assert_allclose(u.values, [[1.0, 0.9], [0.0, 0.1]], atol=1e-10)
        assert state.upper_active[0, 0] or state.lower_active[1, 0]

    def test_single_cluster(self):
        q = qmat([[2.0, 5.0]])
        u, _, state = solve_box_qp(q, ONES2, np.array([2.0]))
        np.testing.assert_allclose(u.values, 1.0, atol=1e-12)
        assert not state.lower_active.any() and not state.upper_active.any()

    def test_matches_projected_gradient_oracle(self):
        rng = np.random.default_rng(4321)
        worst = 0.0
        for _ in range(40):
            qv, z, mu = random_instance(rng)
            q = SquaredDistanceMatrix.from_values(qv)
            u, mult, state = solve_box_qp(q, z, mu)
            reference = projected_gradient_box_solve(qv, z, mu)
            worst = max(worst, np.abs(u.values - reference).max())
            assert kkt_residual(u, mult, state, q, z, mu) <= 1e-8
        assert worst <= 1e-5

    def test_objective_dominance(self):
        rng = np.random.default_rng(999)
        for _ in range(50):
            qv, z, mu = random_instance(rng)
            q = SquaredDistanceMatrix.from_values(qv)
            u_eq, _ = solve_equality_qp(q, z, mu)
            u_box, _, _ = solve_box_qp(q, z, mu)
            relaxed = ((u_eq.values**2) * qv).sum()
            bounded = ((u_box.values**2) * qv).sum()
            assert relaxed <= bounded + 1e-9 * (1.0 + bounded)

    def test_unreachable_capacity_rejected(self):
        q = qmat(np.ones((2, 2)))
        with pytest.raises(InfeasibleBoxProblem):
            solve_box_qp(q, ONES2, np.array([3.0, -1.0]))

    def test_scaling_equivariance(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            qv, z, mu = random_instance(rng)
            u_base, _, _ = solve_box_qp(SquaredDistanceMatrix.from_values(qv), z, mu)
            u_scaled, _, _ = solve_box_qp(SquaredDistanceMatrix.from_values(2.5 * qv), z, mu)
            assert np.abs(u_base.values - u_scaled.values).max() <= 1e-10


class TestKktResidual:
    def test_solver_output_is_small(self):
        rng = np.random.default_rng(6)
        qv, z, mu = random_instance(rng)
        q = SquaredDistanceMatrix.from_values(qv)
        u, mult, state = solve_box_qp(q, z, mu)
        assert kkt_residual(u, mult, state, q, z, mu) <= 1e-8

    def test_column_sum_violation_detected(self):
        q = qmat(np.ones((2, 2)))
        u, mult, state = solve_box_qp(q, ONES2, ONES2)
        broken = u.values.copy()
        broken[0, 0] += 0.1
        residual = kkt_residual(MembershipMatrix(values=broken), mult, state, q, ONES2, ONES2)
        assert residual >= 0.1

    def test_bound_violation_detected(self):
        q = qmat(np.ones((2, 2)))
        state = ActiveSetState.all_free(2, 2)
        values = np.array([[1.05, -0.05], [-0.05, 1.05]])
        mult = KktMultipliers(alpha=np.zeros(2), beta=np.zeros(2))
        residual = kkt_residual(MembershipMatrix(values=values, box_feasible=False),
                                mult, state, q, ONES2, ONES2)
        assert residual >= 0.05

    def test_shape_mismatch(self):
        q = qmat(np.ones((2, 2)))
        u, mult, state = solve_box_qp(q, ONES2, ONES2)
        with pytest.raises(DimensionMismatch):
            kkt_residual(u, mult, state, q, np.ones(3), ONES2)


class TestScalingBehavior:
    def _timed_solve(self, n, g, seed=0, repeats=3):
        rng = np.random.default_rng(seed)
        qv = rng.uniform(0.1, 10.0, size=(g, n)) ** 2
        z = rng.uniform(0.5, 2.0, size=n)
        split = rng.uniform(0.1, 1.0, size=g)
        mu = z.sum() * split / split.sum()
        q = SquaredDistanceMatrix.from_values(qv)
        best = np.inf
        for _ in range(repeats):
            start = time.perf_counter()
            solve_equality_qp(q, z, mu)
            best = min(best, time.perf_counter() - start)
        return best

    def test_doubling_n_roughly_doubles_time(self):
        small = self._timed_solve(2000, 8)
        large = self._timed_solve(4000, 8)
        assert large <= 3.0 * small + 0.005
