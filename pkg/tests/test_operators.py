"""Operator zoo: evaluation, claim validation, and sampling certifiers."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adrsplit import operators as ops
from adrsplit.errors import ParameterError, UnsupportedEvalError


class TestEvaluate:
    def test_scaled_identity(self):
        op = ops.scaled_identity(2.0, 2)
        np.testing.assert_allclose(ops.evaluate(op, [1.0, -1.0]), [2.0, -2.0])

    def test_rotation_quarter_turn(self):
        op = ops.rotation2d(np.pi / 2)
        np.testing.assert_allclose(
            ops.evaluate(op, [1.0, 0.0]), [0.0, 1.0], atol=1e-15
        )

    def test_affine_against_matvec_oracle(self):
        m = np.array([[1.0, 0.0], [0.0, 3.0]])
        u = np.array([1.0, 1.0])
        op = ops.affine(m, u)
        x = np.array([1.0, 1.0])
        np.testing.assert_allclose(ops.evaluate(op, x), m @ x + u)
        np.testing.assert_allclose(ops.evaluate(op, x), [2.0, 4.0])

    def test_sum_of_two(self):
        a = ops.scaled_identity(1.0, 2)
        b = ops.scaled_identity(2.0, 2, offset=[1.0, 0.0])
        s = ops.sum_of_two(a, b)
        np.testing.assert_allclose(ops.evaluate(s, [1.0, 1.0]), [4.0, 3.0])

    def test_normal_cone_rejects_eval(self):
        cone = ops.normal_cone_box([0.0], [1.0])
        with pytest.raises(UnsupportedEvalError):
            ops.evaluate(cone, [0.5])

    def test_batched_evaluation(self, rng):
        op = ops.scaled_identity_plus_rotation(-0.25, np.pi / 2)
        batch = rng.standard_normal((5, 2))
        out = ops.evaluate(op, batch)
        for row_in, row_out in zip(batch, out):
            np.testing.assert_allclose(row_out, ops.evaluate(op, row_in), rtol=1e-14)


class TestClaimValidation:
    def test_overclaimed_monotone_modulus_rejected(self):
        m = np.array([[1.0, 0.0], [0.0, 3.0]])
        with pytest.raises(ParameterError):
            ops.affine(m, claims=(ops.ModulusClaim("monotone", 1.5),))

    def test_exact_monotone_modulus_accepted(self):
        m = np.array([[1.0, 0.0], [0.0, 3.0]])
        op = ops.affine(m, claims=(ops.ModulusClaim("monotone", 1.0),))
        assert op.claim("monotone").alpha == 1.0

    def test_normal_cone_claims_restricted(self):
        with pytest.raises(ParameterError):
            ops.OperatorSpec(
                kind="normal_cone_box",
                dim=1,
                lower=np.array([0.0]),
                upper=np.array([1.0]),
                claims=(ops.ModulusClaim("monotone", 0.5),),
            )

    def test_default_affine_claims(self):
        op = ops.affine(np.diag([2.0, 4.0]))
        assert op.claim("monotone").alpha == pytest.approx(2.0, abs=1e-12)
        assert op.claim("comonotone").alpha == pytest.approx(0.25, abs=1e-9)

    def test_sum_claims_add(self):
        a = ops.scaled_identity(-0.25, 2)
        b = ops.scaled_identity(0.75, 2)
        s = ops.sum_of_two(a, b)
        assert s.claim("monotone").alpha == pytest.approx(0.5, abs=1e-15)


class TestCertifyMonotone:
    def test_scaled_identity_equality(self):
        op = ops.scaled_identity(-0.25, 3)
        cert = ops.certify_monotone(op, -0.25, samples=500, seed=3)
        assert cert.passed
        assert abs(cert.worst_violation) <= 1e-12

    def test_rotation_is_monotone_with_zero_modulus(self, rng):
        op = ops.rotation2d(np.pi / 2)
        cert = ops.certify_monotone(op, 0.0, samples=500, seed=5)
        assert cert.passed
        # antisymmetry oracle: <z, Rz> = 0 for the quarter turn
        z = rng.standard_normal((100, 2))
        rz = ops.evaluate(op, z)
        assert np.max(np.abs(np.einsum("ij,ij->i", z, rz))) <= 1e-12

    def test_modulus_above_scale_fails(self):
        op = ops.scaled_identity(0.5, 2)
        cert = ops.certify_monotone(op, 1.0, samples=200, seed=7)
        assert not cert.passed

    def test_map_target_needs_dim(self):
        with pytest.raises(ParameterError):
            ops.certify_monotone(lambda x: x, 0.0, samples=10, seed=0)

    def test_requires_at_least_one_sample(self):
        op = ops.scaled_identity(1.0, 1)
        with pytest.raises(ParameterError):
            ops.certify_monotone(op, 1.0, samples=0, seed=0)


class TestCertifyComonotone:
    def test_double_identity_half(self):
        # <x-y, 2(x-y)> = (1/2) ||2(x-y)||^2 exactly
        op = ops.scaled_identity(2.0, 2)
        cert = ops.certify_comonotone(op, 0.5, samples=400, seed=11)
        assert cert.passed
        assert abs(cert.worst_violation) <= 1e-12

    def test_negative_scale(self):
        op = ops.scaled_identity(-0.5, 2)
        cert = ops.certify_comonotone(op, -2.0, samples=400, seed=13)
        assert cert.passed
        assert abs(cert.worst_violation) <= 1e-12

    def test_zero_operator_any_modulus(self):
        zero = ops.affine(np.zeros((2, 2)))
        for alpha in (-3.0, 0.0, 5.0):
            assert ops.certify_comonotone(zero, alpha, samples=100, seed=17).passed


class TestCertifyCocoercive:
    def test_identity_firmly_nonexpansive(self):
        cert = ops.certify_cocoercive(lambda x: x, 1.0, samples=200, seed=19, dim=3)
        assert cert.passed
        assert abs(cert.worst_violation) <= 1e-12

    def test_halving_is_two_cocoercive(self):
        cert = ops.certify_cocoercive(
            lambda x: 0.5 * x, 2.0, samples=200, seed=23, dim=3
        )
        assert cert.passed
        assert abs(cert.worst_violation) <= 1e-12

    def test_expansion_fails(self):
        cert = ops.certify_cocoercive(lambda x: 2.0 * x, 1.0, samples=200, seed=29, dim=3)
        assert not cert.passed

    def test_nonpositive_constant_rejected(self):
        with pytest.raises(ParameterError):
            ops.certify_cocoercive(lambda x: x, 0.0, samples=10, seed=0, dim=1)


class TestCertifyConicallyAveraged:
    def test_identity_any_theta(self):
        for theta in (0.25, 1.0, 3.0):
            cert = ops.certify_conically_averaged(
                lambda x: x, theta, samples=100, seed=31, dim=2
            )
            assert cert.passed

    def test_halving_is_half_averaged(self):
        cert = ops.certify_conically_averaged(
            lambda x: 0.5 * x, 0.5, samples=200, seed=37, dim=3
        )
        assert cert.passed

    def test_reflection_is_one_averaged(self):
        cert = ops.certify_conically_averaged(
            lambda x: -x, 1.0, samples=200, seed=41, dim=3
        )
        assert cert.passed
        assert abs(cert.worst_violation) <= 1e-12

    def test_nonpositive_theta_rejected(self):
        with pytest.raises(ParameterError):
            ops.certify_conically_averaged(lambda x: x, -0.5, samples=10, seed=0, dim=1)


class TestConstantMonotonicityProperties:
    """Passing a certificate at one constant implies passing at weaker ones."""

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.05, 1.0), st.integers(0, 2**31 - 1))
    def test_weaker_cocoercivity_constant_still_passes(self, fraction, seed):
        tau = 2.0
        assert ops.certify_cocoercive(
            lambda x: 0.5 * x, fraction * tau, samples=64, seed=seed, dim=4
        ).passed

    @settings(max_examples=40, deadline=None)
    @given(st.floats(1.0, 20.0), st.integers(0, 2**31 - 1))
    def test_larger_averagedness_constant_still_passes(self, factor, seed):
        theta = 1.0
        assert ops.certify_conically_averaged(
            lambda x: -x, factor * theta, samples=64, seed=seed, dim=4
        ).passed

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.integers(1, 6))
    def test_affine_modulus_always_certified(self, seed, dim):
        gen = np.random.default_rng(seed)
        m = gen.standard_normal((dim, dim))
        lam_min = float(np.linalg.eigvalsh(0.5 * (m + m.T))[0])
        op = ops.affine(m, claims=(ops.ModulusClaim("monotone", lam_min),))
        assert ops.certify_monotone(op, lam_min, samples=128, seed=seed ^ 0xABCD).passed


class TestRelaxationEquivalence:
    def test_verdicts_agree_under_relaxation(self, rng):
        # relaxing the map by sigma rescales the averagedness constant by sigma
        m = np.eye(3) - 0.4 * np.diag([1.0, 2.0, 0.5])
        base = lambda x: x @ m.T  # noqa: E731
        theta = 0.9
        for sigma in (0.5, 2.0):
            relaxed = ops.relax_map(base, sigma)
            c1 = ops.certify_conically_averaged(base, theta, samples=300, seed=43, dim=3)
            c2 = ops.certify_conically_averaged(
                relaxed, sigma * theta, samples=300, seed=43, dim=3
            )
            assert c1.verdict == c2.verdict
