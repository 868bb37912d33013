"""Weighted product space: inner products and scaled-diagonal projections."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adrsplit.errors import InvalidSubspaceError, ShapeError
from adrsplit.vecspace import (
    ScaledDiagonal,
    WeightedSpace,
    inner_w,
    norm_w,
    project_affine_complement,
    project_scaled_diagonal,
)


def lstsq_projection(x, tau, weights, block_dim):
    """Independent oracle: minimise sum_i w_i ||x_i - t_i u||^2 by dense least squares."""
    n = tau.size
    blocks = x.reshape(n, block_dim)
    design = np.concatenate(
        [np.sqrt(weights[i]) * tau[i] * np.eye(block_dim) for i in range(n)], axis=0
    )
    target = np.concatenate(
        [np.sqrt(weights[i]) * blocks[i] for i in range(n)], axis=0
    )
    u, *_ = np.linalg.lstsq(design, target, rcond=None)
    return np.concatenate([tau[i] * u for i in range(n)])


def lstsq_affine_complement(z, anchor, tau, weights, block_dim):
    """Oracle for the complement projection: parametrise anchor + C_perp and solve.

    C_perp in the weighted metric is the null space of the map
    ``v -> sum_i w_i t_i v_i``; project z - anchor onto it by subtracting the
    weighted least-squares diagonal component.
    """
    shifted = z - anchor
    return anchor + shifted - lstsq_projection(shifted, tau, weights, block_dim)


class TestInnerProduct:
    def test_sum_of_weights_on_ones(self):
        sp = WeightedSpace(2, 1, [1.0, 2.0])
        assert inner_w([1.0, 1.0], [1.0, 1.0], sp) == 3.0

    def test_orthogonal_blocks(self):
        sp = WeightedSpace(2, 2, [1.0, 1.0])
        assert inner_w([1, 0, 0, 0], [0, 1, 0, 0], sp) == 0.0

    def test_direct_expansion(self):
        # oracle: 2*(1*4) + 3*(2*5) = 38
        sp = WeightedSpace(2, 1, [2.0, 3.0])
        assert inner_w([1.0, 2.0], [4.0, 5.0], sp) == pytest.approx(38.0, abs=1e-14)

    def test_dimension_mismatch(self):
        sp = WeightedSpace(2, 2, [1.0, 1.0])
        with pytest.raises(ShapeError):
            inner_w([1.0, 2.0], [1.0, 2.0], sp)

    def test_symmetry_and_bilinearity(self, rng):
        sp = WeightedSpace(3, 2, [0.5, 1.0, 2.5])
        x, y, z = rng.standard_normal((3, 6))
        assert inner_w(x, y, sp) == pytest.approx(inner_w(y, x, sp), rel=1e-14)
        lhs = inner_w(2.0 * x + z, y, sp)
        assert lhs == pytest.approx(2.0 * inner_w(x, y, sp) + inner_w(z, y, sp), rel=1e-12)


class TestScaledDiagonalProjection:
    def test_weighted_example_against_oracle(self):
        sp = WeightedSpace(2, 1, [1.0, 2.0])
        diag = ScaledDiagonal([3.0, 1.0])
        x = np.array([1.0, 5.0])
        p = project_scaled_diagonal(x, diag, sp)
        # u = (1*3*1 + 2*1*5) / (1*9 + 2*1) = 13/11
        np.testing.assert_allclose(p, [39.0 / 11.0, 13.0 / 11.0], rtol=1e-14)
        oracle = lstsq_projection(x, diag.tau, sp.weights, 1)
        np.testing.assert_allclose(p, oracle, rtol=1e-12)

    def test_fixed_point_on_the_diagonal(self):
        sp = WeightedSpace(2, 1, [1.0, 2.0])
        diag = ScaledDiagonal([3.0, 1.0])
        x = np.array([3 * 0.7, 0.7])
        np.testing.assert_allclose(
            project_scaled_diagonal(x, diag, sp), x, rtol=1e-14
        )

    def test_unweighted_mean(self):
        sp = WeightedSpace(2, 1, [1.0, 1.0])
        diag = ScaledDiagonal([1.0, 1.0])
        np.testing.assert_allclose(
            project_scaled_diagonal(np.array([0.0, 2.0]), diag, sp), [1.0, 1.0]
        )

    def test_all_zero_tau_rejected(self):
        with pytest.raises(InvalidSubspaceError):
            ScaledDiagonal([0.0, 0.0])

    def test_zero_entries_allowed_when_weighted_norm_positive(self):
        sp = WeightedSpace(2, 1, [1.0, 1.0])
        diag = ScaledDiagonal([0.0, 2.0])
        x = np.array([5.0, 3.0])
        p = project_scaled_diagonal(x, diag, sp)
        oracle = lstsq_projection(x, diag.tau, sp.weights, 1)
        np.testing.assert_allclose(p, oracle, rtol=1e-12)

    def test_batched_projection_matches_loop(self, rng):
        sp = WeightedSpace(3, 2, [1.0, 0.5, 2.0])
        diag = ScaledDiagonal([1.0, -1.0, 0.5])
        batch = rng.standard_normal((7, 6))
        stacked = project_scaled_diagonal(batch, diag, sp)
        for row_in, row_out in zip(batch, stacked):
            np.testing.assert_allclose(
                row_out, project_scaled_diagonal(row_in, diag, sp), rtol=1e-14
            )


class TestAffineComplement:
    def test_zero_anchor_is_linear_complement(self, rng):
        sp = WeightedSpace(2, 2, [1.0, 3.0])
        diag = ScaledDiagonal([1.0, 2.0])
        z = rng.standard_normal(4)
        got = project_affine_complement(z, np.zeros(4), diag, sp)
        np.testing.assert_allclose(
            got, z - project_scaled_diagonal(z, diag, sp), rtol=1e-14
        )

    def test_fixed_point_inside_the_affine_set(self, rng):
        sp = WeightedSpace(2, 1, [1.0, 2.0])
        diag = ScaledDiagonal([1.0, 1.0])
        anchor = np.array([1.0, -1.0])
        z = rng.standard_normal(2)
        member = project_affine_complement(z, anchor, diag, sp)
        np.testing.assert_allclose(
            project_affine_complement(member, anchor, diag, sp), member, atol=1e-12
        )

    def test_half_half_example_against_oracle(self):
        # recomputed: anchor (1,0), z (3,3) in the unweighted diagonal setting
        sp = WeightedSpace(2, 1, [1.0, 1.0])
        diag = ScaledDiagonal([1.0, 1.0])
        anchor = np.array([1.0, 0.0])
        z = np.array([3.0, 3.0])
        got = project_affine_complement(z, anchor, diag, sp)
        oracle = lstsq_affine_complement(z, anchor, diag.tau, sp.weights, 1)
        np.testing.assert_allclose(got, oracle, rtol=1e-12)
        np.testing.assert_allclose(got, [0.5, 0.5], rtol=1e-14)

    def test_residual_lies_in_diagonal(self, rng):
        sp = WeightedSpace(3, 2, [1.0, 2.0, 0.25])
        diag = ScaledDiagonal([2.0, 1.0, -1.0])
        z = rng.standard_normal(6)
        anchor = rng.standard_normal(6)
        got = project_affine_complement(z, anchor, diag, sp)
        residual = z - got
        np.testing.assert_allclose(
            project_scaled_diagonal(residual, diag, sp), residual, atol=1e-12
        )


@st.composite
def projection_instances(draw):
    n = draw(st.integers(2, 6))
    d = draw(st.integers(1, 5))
    weights = draw(
        st.lists(st.floats(0.1, 10.0), min_size=n, max_size=n)
    )
    tau = draw(
        st.lists(st.floats(-5.0, 5.0), min_size=n, max_size=n).filter(
            lambda t: max(abs(v) for v in t) > 0.1
        )
    )
    x = draw(
        st.lists(st.floats(-100.0, 100.0), min_size=n * d, max_size=n * d)
    )
    return (
        WeightedSpace(n, d, np.array(weights)),
        ScaledDiagonal(np.array(tau)),
        np.array(x),
    )


class TestProjectionProperties:
    @settings(max_examples=60, deadline=None)
    @given(projection_instances())
    def test_idempotent(self, instance):
        sp, diag, x = instance
        p1 = project_scaled_diagonal(x, diag, sp)
        p2 = project_scaled_diagonal(p1, diag, sp)
        assert np.max(np.abs(p2 - p1)) <= 1e-12 * (1.0 + np.max(np.abs(p1)))

    @settings(max_examples=60, deadline=None)
    @given(projection_instances(), st.integers(0, 2**31 - 1))
    def test_residual_orthogonal_to_subspace(self, instance, seed):
        sp, diag, x = instance
        residual = x - project_scaled_diagonal(x, diag, sp)
        v = np.random.default_rng(seed).standard_normal(sp.block_dim)
        norm_v = np.linalg.norm(v)
        if norm_v > 0:
            v /= norm_v
        member = np.concatenate([t * v for t in diag.tau])
        assert abs(inner_w(member, residual, sp)) <= 1e-10 * (1.0 + norm_w(x, sp))

    @settings(max_examples=60, deadline=None)
    @given(projection_instances())
    def test_matches_least_squares_oracle(self, instance):
        sp, diag, x = instance
        p = project_scaled_diagonal(x, diag, sp)
        oracle = lstsq_projection(x, diag.tau, sp.weights, sp.block_dim)
        assert np.linalg.norm(p - oracle) <= 1e-10 * (1.0 + np.linalg.norm(x))

    @settings(max_examples=60, deadline=None)
    @given(projection_instances())
    def test_pythagoras(self, instance):
        sp, diag, x = instance
        p = project_scaled_diagonal(x, diag, sp)
        lhs = norm_w(x, sp) ** 2
        rhs = norm_w(p, sp) ** 2 + norm_w(x - p, sp) ** 2
        assert abs(lhs - rhs) <= 1e-10 * (1.0 + lhs)
