"""Clustering evaluation: objective value, hardening, ARI, capacity residuals."""

from __future__ import annotations

import numpy as np

from .core import MembershipMatrix
from .errors import DimensionMismatch, LengthMismatch
from .qp import SquaredDistanceMatrix


def objective(u: MembershipMatrix, q: SquaredDistanceMatrix, m: float) -> float:
    """Total weighted scatter ``sum_ij u_ij^m q_ij``."""
    uv = u.values
    qv = q.values
    if uv.shape != qv.shape:
        raise DimensionMismatch(f"membership {uv.shape} vs distances {qv.shape}")
    return float(((uv**m) * qv).sum())


def harden(u: MembershipMatrix) -> np.ndarray:
    """Crisp labels by per-point argmax; ties go to the lowest cluster id."""
    return u.values.argmax(axis=0)


def adjusted_rand_index(a, b) -> float:
    """Chance-corrected agreement between two partitions, in [-1, 1].

    Computed from the contingency table with the permutation-model
    expectation.  When both partitions are a single cluster the raw and
    expected indices coincide and the score is defined as 1.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"label vectors have shapes {a.shape} and {b.shape}")
    n = a.shape[0]
    if n == 0:
        raise LengthMismatch("label vectors are empty")

    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)

    def pairs(counts):
        return (counts * (counts - 1) // 2).sum()

    same_both = pairs(table)
    same_a = pairs(table.sum(axis=1))
    same_b = pairs(table.sum(axis=0))
    all_pairs = n * (n - 1) // 2
    expected = same_a * same_b / all_pairs if all_pairs else 0.0
    maximum = 0.5 * (same_a + same_b)
    if maximum == expected:
        return 1.0
    return float((same_both - expected) / (maximum - expected))


def capacity_residual(u: MembershipMatrix, z, mu) -> float:
    """Worst relative miss of the weighted row sums against the capacities."""
    uv = u.values
    z = np.asarray(z, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if uv.shape != (mu.shape[0], z.shape[0]):
        raise DimensionMismatch(
            f"membership {uv.shape} vs weights {z.shape} and capacities {mu.shape}"
        )
    return float((np.abs(uv @ z - mu) / mu).max())
