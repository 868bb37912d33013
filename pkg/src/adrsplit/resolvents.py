"""Closed-form resolvents and their certified cocoercivity/averagedness constants.

The resolvent of ``gamma * A`` maps ``x`` to the unique ``u`` with
``x in u + gamma A(u)``. Only kinds with a closed form are supported:
matrix-backed operators solve ``(I + gamma M) u = x - gamma c`` through a
cached LU factorization, and normal cones project metrically onto their set.
No inner iterative solver is involved, so resolvent outputs are exact up to
the direct solve.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    ParameterError,
    RegimeError,
    ShapeError,
    UnsupportedOperatorError,
)
from .operators import COMONOTONE, MONOTONE, OperatorSpec, evaluate

__all__ = [
    "ResolventHandle",
    "resolve",
    "relaxed_resolve",
    "reflected_resolve",
    "expected_constant",
]


def expected_constant(flavor: str, gamma: float, alpha: float) -> float:
    """Derived constant of the resolvent of ``gamma * A`` for an ``alpha`` modulus.

    For a monotone modulus the resolvent is ``(1 + gamma*alpha)``-cocoercive,
    valid when ``1 + gamma*alpha > 0``. For a comonotone modulus it is
    conically ``gamma / (2 (gamma + alpha))``-averaged, valid when
    ``gamma + alpha > 0``.
    """
    if gamma <= 0.0:
        raise ParameterError("step size gamma must be positive")
    if flavor == MONOTONE:
        if 1.0 + gamma * alpha <= 0.0:
            raise RegimeError(
                f"monotone regime needs 1 + gamma*alpha > 0, got {1.0 + gamma * alpha}"
            )
        return 1.0 + gamma * alpha
    if flavor == COMONOTONE:
        if gamma + alpha <= 0.0:
            raise RegimeError(
                f"comonotone regime needs gamma + alpha > 0, got {gamma + alpha}"
            )
        return gamma / (2.0 * (gamma + alpha))
    raise ParameterError(f"unknown modulus flavor {flavor!r}")


def _collapse_affine(op: OperatorSpec) -> tuple[np.ndarray, np.ndarray]:
    """Reduce matrix-backed kinds (including sums of them) to ``(M, u)``."""
    if op.matrix is not None:
        return op.matrix, op.offset
    if op.kind == "sum_of_two":
        m1, u1 = _collapse_affine(op.parts[0])
        m2, u2 = _collapse_affine(op.parts[1])
        return m1 + m2, u1 + u2
    raise UnsupportedOperatorError(
        f"no closed-form resolvent for operator kind {op.kind!r}"
    )


@dataclass(frozen=True)
class ResolventHandle:
    """Resolvent of ``gamma * op`` with a cached direct-solve evaluator.

    Immutable after construction; evaluation is reentrant. Derived constants
    for each modulus claim whose regime precondition holds are exposed via
    :attr:`derived_constants`.
    """

    op: OperatorSpec
    gamma: float
    _lu: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.gamma <= 0.0:
            raise ParameterError("step size gamma must be positive")
        if self.op.kind not in ("normal_cone_box", "normal_cone_ball"):
            m, _ = _collapse_affine(self.op)
            system = np.eye(self.op.dim) + self.gamma * m
            try:
                lu = scipy.linalg.lu_factor(system)
            except scipy.linalg.LinAlgError as exc:
                raise RegimeError(f"I + gamma*M is singular: {exc}") from exc
            if not np.all(np.isfinite(lu[0])) or np.any(
                np.abs(np.diag(lu[0])) < 1e-14 * (1.0 + np.abs(system).max())
            ):
                raise RegimeError(
                    "I + gamma*M is numerically singular; the modulus regime "
                    "preconditions exclude this"
                )
            object.__setattr__(self, "_lu", lu)

    @property
    def dim(self) -> int:
        return self.op.dim

    @property
    def derived_constants(self) -> dict[str, float]:
        """Constants realized by this resolvent, keyed by claim flavor.

        ``monotone`` maps to the cocoercivity constant, ``comonotone`` to the
        conical averagedness constant. Claims whose regime precondition fails
        are omitted.
        """
        out = {}
        for flavor in (MONOTONE, COMONOTONE):
            claim = self.op.claim(flavor)
            if claim is None:
                continue
            try:
                out[flavor] = expected_constant(flavor, self.gamma, claim.alpha)
            except RegimeError:
                continue
        return out

    @property
    def map(self):
        """The resolvent as a batch-aware point-map."""
        return lambda x: resolve(self, x)

    def relaxed_map(self, factor: float):
        """The relaxed resolvent ``(1 - factor) Id + factor J`` as a point-map."""
        if factor <= 0.0:
            raise ParameterError("relaxation parameter must be positive")
        return lambda x: relaxed_resolve(self, factor, x)


def resolve(handle: ResolventHandle, x) -> np.ndarray:
    """Evaluate the resolvent at ``x`` (batched over leading axes)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != handle.dim:
        raise ShapeError(f"point has dimension {x.shape[-1]}, resolvent {handle.dim}")
    op = handle.op
    if op.kind == "normal_cone_box":
        return np.clip(x, op.lower, op.upper)
    if op.kind == "normal_cone_ball":
        shifted = x - op.center
        dist = np.linalg.norm(shifted, axis=-1, keepdims=True)
        factor = np.where(dist > op.radius, op.radius / np.maximum(dist, 1e-300), 1.0)
        return op.center + shifted * factor
    _, u = _collapse_affine(op)
    rhs = x - handle.gamma * u
    if rhs.ndim == 1:
        return scipy.linalg.lu_solve(handle._lu, rhs)
    return scipy.linalg.lu_solve(handle._lu, rhs.T).T


def relaxed_resolve(handle: ResolventHandle, factor: float, x) -> np.ndarray:
    """Relaxed resolvent ``(1 - factor) x + factor J(x)``.

    ``factor = 2`` gives the reflected resolvent.
    """
    if factor <= 0.0:
        raise ParameterError("relaxation parameter must be positive")
    x = np.asarray(x, dtype=np.float64)
    return (1.0 - factor) * x + factor * resolve(handle, x)


def reflected_resolve(handle: ResolventHandle, x) -> np.ndarray:
    """The reflected resolvent ``2 J - Id``."""
    return relaxed_resolve(handle, 2.0, x)


def residual(handle: ResolventHandle, x) -> float:
    """Defect of the resolvent identity ``x = J(x) + gamma A(J(x))``.

    Only meaningful for single-valued operators; used by tests as an
    independent consistency check on the direct solve.
    """
    x = np.asarray(x, dtype=np.float64)
    u = resolve(handle, x)
    return float(np.linalg.norm(x - (u + handle.gamma * evaluate(handle.op, u))))
