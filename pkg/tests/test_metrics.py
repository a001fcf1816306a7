import numpy as np
import pytest

from capfuzz import (
    DimensionMismatch,
    LengthMismatch,
    MembershipMatrix,
    SquaredDistanceMatrix,
    adjusted_rand_index,
    capacity_residual,
    harden,
    objective,
)


def members(values, box_feasible=True):
    return MembershipMatrix(values=np.asarray(values, dtype=float),
                            box_feasible=box_feasible)


def distances(values):
    return SquaredDistanceMatrix.from_values(np.asarray(values, dtype=float))


class TestObjective:
    def test_zero_membership_gives_zero(self):
        assert objective(members(np.zeros((2, 3)), box_feasible=False),
                         distances(np.ones((2, 3))), 2.0) == 0.0

    def test_crisp_picks_diagonal(self):
        value = objective(members([[1.0, 0.0], [0.0, 1.0]]),
                          distances([[1.0, 9.0], [9.0, 1.0]]), 2.0)
        assert value == pytest.approx(2.0)

    def test_fuzzy_expansion(self):
        # direct expansion: 0.8^2*1 + 0.2^2*4 + 0.2^2*4 + 0.8^2*1
        value = objective(members([[0.8, 0.2], [0.2, 0.8]]),
                          distances([[1.0, 4.0], [4.0, 1.0]]), 2.0)
        assert value == pytest.approx(1.6)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            objective(members(np.ones((2, 2))), distances(np.ones((2, 3))), 2.0)

    def test_monotone_in_each_entry(self):
        rng = np.random.default_rng(44)
        u = rng.uniform(0.1, 0.9, size=(3, 4))
        q = rng.uniform(0.5, 5.0, size=(3, 4))
        base = objective(members(u), distances(q), 2.0)
        for i in range(3):
            for j in range(4):
                bumped = u.copy()
                bumped[i, j] += 1e-6
                assert objective(members(bumped), distances(q), 2.0) > base


class TestHarden:
    def test_argmax_labels(self):
        labels = harden(members([[0.9, 0.2], [0.1, 0.8]]))
        np.testing.assert_array_equal(labels, [0, 1])

    def test_tie_goes_to_lowest_id(self):
        labels = harden(members([[0.5], [0.5]]))
        np.testing.assert_array_equal(labels, [0])

    def test_single_cluster(self):
        labels = harden(members(np.ones((1, 4))))
        np.testing.assert_array_equal(labels, np.zeros(4))

    def test_identity_on_crisp_memberships(self):
        crisp = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        np.testing.assert_array_equal(harden(members(crisp)), [0, 1, 2])


class TestAdjustedRandIndex:
    def test_relabeled_partition_scores_one(self):
        assert adjusted_rand_index([0, 0, 1, 1], [1, 1, 0, 0]) == pytest.approx(1.0)

    def test_crossed_partition_value(self):
        # 2x2 contingency table with every cell 1: the standard formula
        # gives (0 - 2/3) / (2 - 2/3) = -1/2
        assert adjusted_rand_index([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(-0.5)

    def test_self_agreement(self):
        rng = np.random.default_rng(3)
        labels = rng.integers(0, 4, size=30)
        assert adjusted_rand_index(labels, labels) == pytest.approx(1.0)

    def test_symmetry(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            a = rng.integers(0, 3, size=25)
            b = rng.integers(0, 4, size=25)
            assert adjusted_rand_index(a, b) == pytest.approx(
                adjusted_rand_index(b, a)
            )

    def test_relabel_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a = rng.integers(0, 4, size=30)
            b = rng.integers(0, 3, size=30)
            permutation = rng.permutation(4)
            assert adjusted_rand_index(permutation[a], b) == pytest.approx(
                adjusted_rand_index(a, b)
            )

    def test_both_single_cluster_defined_as_one(self):
        assert adjusted_rand_index([0, 0, 0], [1, 1, 1]) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            adjusted_rand_index([0, 1], [0, 1, 2])


class TestCapacityResidual:
    def test_feasible_solution_tiny(self):
        u = members([[0.5, 0.5], [0.5, 0.5]])
        assert capacity_residual(u, np.ones(2), np.ones(2)) <= 1e-12

    def test_lopsided_rows(self):
        u = members([[1.0, 1.0], [0.0, 0.0]], box_feasible=True)
        assert capacity_residual(u, np.ones(2), np.ones(2)) == pytest.approx(1.0)

    def test_relative_scaling(self):
        u = members([[1.0, 1.0], [0.0, 0.0]])
        value = capacity_residual(u, np.ones(2), np.array([4.0, 200.0]))
        assert value == pytest.approx(max(2.0 / 4.0, 200.0 / 200.0))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            capacity_residual(members(np.ones((2, 2))), np.ones(3), np.ones(2))
