"""Shared builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from adrsplit import operators


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_orthogonal(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def spd_affine(rng: np.random.Generator, dim: int, lo=0.5, hi=3.0, offset_scale=1.0):
    """Symmetric positive definite affine operator with known spectrum."""
    d = rng.uniform(lo, hi, size=dim)
    q = random_orthogonal(rng, dim)
    m = q @ np.diag(d) @ q.T
    u = offset_scale * rng.standard_normal(dim)
    return operators.affine(m, u), float(np.min(d)), float(1.0 / np.max(d))


def exact_modulus_instances(count: int, seed: int):
    """Zoo members whose monotone and comonotone moduli are known in closed form.

    Yields tuples ``(op, gamma, mono, como)`` where both resolvent regimes
    (``1 + gamma*mono > 0`` and ``gamma + como > 0``) hold for the chosen
    ``gamma``.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        family = len(out) % 4
        gamma = float(rng.uniform(0.3, 2.0))
        if family == 0:
            c = float(rng.uniform(0.2, 3.0))
            dim = int(rng.integers(1, 9))
            offset = rng.standard_normal(dim)
            op = operators.scaled_identity(c, dim, offset)
            mono, como = c, 1.0 / c
        elif family == 1:
            angle = float(rng.uniform(-np.pi / 2, np.pi / 2))
            op = operators.rotation2d(angle)
            mono = como = float(np.cos(angle))
        elif family == 2:
            scale = float(rng.uniform(0.05, 2.0))
            angle = float(rng.uniform(-np.pi, np.pi))
            a = scale + float(np.cos(angle))
            b = float(np.sin(angle))
            if a <= 0.01:
                continue
            op = operators.scaled_identity_plus_rotation(scale, angle)
            mono, como = a, a / (a * a + b * b)
        else:
            dim = int(rng.integers(2, 9))
            d = rng.uniform(0.3, 4.0, size=dim)
            q = random_orthogonal(rng, dim)
            m = q @ np.diag(d) @ q.T
            op = operators.affine(
                m,
                rng.standard_normal(dim),
                claims=(
                    operators.ModulusClaim("monotone", float(np.min(d))),
                    operators.ModulusClaim("comonotone", float(1.0 / np.max(d))),
                ),
            )
            mono, como = float(np.min(d)), float(1.0 / np.max(d))
        out.append((op, gamma, mono, como))
    return out
