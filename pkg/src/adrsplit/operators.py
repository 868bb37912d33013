"""Operator zoo with certified monotonicity moduli and sampling certifiers.

An :class:`OperatorSpec` describes a (possibly set-valued) operator together
with *modulus claims*: statements that it is monotone or comonotone with a
given constant. Factory functions attach analytically derived claims; the
constructor re-checks monotone claims for matrix-backed kinds with a dense
eigensolve.

Certifiers are falsifiers, not proofs: a ``pass`` verdict means no violation
was found on the sampled pairs. All sampling is driven by an explicit seed
and is deterministic given it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ParameterError,
    ShapeError,
    UnsupportedEvalError,
)

__all__ = [
    "ModulusClaim",
    "OperatorSpec",
    "Certificate",
    "affine",
    "scaled_identity",
    "rotation2d",
    "scaled_identity_plus_rotation",
    "normal_cone_box",
    "normal_cone_ball",
    "sum_of_two",
    "evaluate",
    "as_map",
    "apply_map",
    "relax_map",
    "certify_monotone",
    "certify_comonotone",
    "certify_cocoercive",
    "certify_conically_averaged",
]

MONOTONE = "monotone"
COMONOTONE = "comonotone"

SINGLE_VALUED_KINDS = (
    "affine",
    "rotation2d",
    "scaled_identity_plus_rotation",
)
SET_VALUED_KINDS = ("normal_cone_box", "normal_cone_ball")

# Relative slack absorbed by every sampled inequality check; the reference
# scale is 1 + ||x - y||^2 of the sampled pair.
CERT_TOL = 1e-10

# Default sampling radius; standard normal entries are scaled by this to
# probe behaviour away from the origin.
DEFAULT_RADIUS = 10.0


@dataclass(frozen=True)
class ModulusClaim:
    """A declared modulus: ``flavor`` is ``monotone`` or ``comonotone``."""

    flavor: str
    alpha: float
    maximal: bool = True

    def __post_init__(self):
        if self.flavor not in (MONOTONE, COMONOTONE):
            raise ParameterError(f"unknown modulus flavor {self.flavor!r}")


@dataclass(frozen=True)
class OperatorSpec:
    """A member of the operator zoo.

    ``kind`` selects the evaluation/resolvent rule; the remaining fields are
    kind-specific. Normal-cone kinds are set-valued: they reject direct
    evaluation and act only through their resolvents (metric projections).
    """

    kind: str
    dim: int
    matrix: np.ndarray | None = None
    offset: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    center: np.ndarray | None = None
    radius: float | None = None
    parts: tuple["OperatorSpec", "OperatorSpec"] | None = None
    claims: tuple[ModulusClaim, ...] = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ParameterError("operator dimension must be positive")
        if self.kind in SET_VALUED_KINDS:
            for claim in self.claims:
                if claim.flavor != MONOTONE or claim.alpha != 0.0:
                    raise ParameterError(
                        "normal-cone operators carry maximal monotone "
                        "(alpha = 0) claims only"
                    )
        if self.matrix is not None:
            self._check_matrix_claims()

    def _check_matrix_claims(self) -> None:
        m = self.matrix
        if m.shape != (self.dim, self.dim):
            raise ShapeError(f"matrix shape {m.shape} does not match dim {self.dim}")
        sym = 0.5 * (m + m.T)
        lam_min = float(np.linalg.eigvalsh(sym)[0])
        tol = 1e-10 * (1.0 + abs(lam_min))
        for claim in self.claims:
            if claim.flavor == MONOTONE and claim.alpha > lam_min + tol:
                raise ParameterError(
                    f"monotone modulus {claim.alpha} exceeds lambda_min of the "
                    f"symmetric part ({lam_min})"
                )
            if claim.flavor == COMONOTONE:
                # A is alpha-comonotone iff sym(M) - alpha M^T M is PSD.
                gram = sym - claim.alpha * (m.T @ m)
                g_min = float(np.linalg.eigvalsh(gram)[0])
                if g_min < -1e-10 * (1.0 + float(np.abs(gram).max())):
                    raise ParameterError(
                        f"comonotone modulus {claim.alpha} is not certified by "
                        f"the matrix (min eigenvalue {g_min})"
                    )

    @property
    def single_valued(self) -> bool:
        if self.kind in SET_VALUED_KINDS:
            return False
        if self.kind == "sum_of_two":
            return all(p.single_valued for p in self.parts)
        return True

    def claim(self, flavor: str) -> ModulusClaim | None:
        """Best (largest-modulus) claim of the given flavor, if any."""
        found = [c for c in self.claims if c.flavor == flavor]
        if not found:
            return None
        return max(found, key=lambda c: c.alpha)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


def affine(
    matrix,
    offset=None,
    claims: tuple[ModulusClaim, ...] | None = None,
) -> OperatorSpec:
    """Affine operator ``x -> M x + u``.

    Without explicit claims, a monotone claim with the smallest eigenvalue of
    the symmetric part is attached, plus a comonotone claim derived from the
    inverse when ``M`` is invertible.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeError("affine operator needs a square matrix")
    dim = m.shape[0]
    u = np.zeros(dim) if offset is None else np.asarray(offset, dtype=np.float64)
    if u.shape != (dim,):
        raise ShapeError(f"offset shape {u.shape} does not match dim {dim}")
    if claims is None:
        sym = 0.5 * (m + m.T)
        mono = float(np.linalg.eigvalsh(sym)[0])
        claims = (ModulusClaim(MONOTONE, mono),)
        try:
            well_conditioned = np.linalg.cond(m) < 1e8
        except np.linalg.LinAlgError:
            well_conditioned = False
        if well_conditioned:
            minv = np.linalg.inv(m)
            como = float(np.linalg.eigvalsh(0.5 * (minv + minv.T))[0])
            # shaved by the inversion roundoff so the constructor re-check holds
            como -= 1e-12 * (1.0 + abs(como))
            claims += (ModulusClaim(COMONOTONE, como),)
    return OperatorSpec(
        kind="affine", dim=dim, matrix=_freeze(m), offset=_freeze(u), claims=tuple(claims)
    )


def scaled_identity(scale: float, dim: int, offset=None) -> OperatorSpec:
    """Scaled identity ``x -> c x + u`` with exact moduli ``c`` and ``1/c``."""
    claims = [ModulusClaim(MONOTONE, float(scale))]
    if scale != 0.0:
        claims.append(ModulusClaim(COMONOTONE, 1.0 / float(scale)))
    return affine(
        np.eye(dim) * float(scale),
        offset=offset if offset is not None else np.zeros(dim),
        claims=tuple(claims),
    )


def _rotation_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def rotation2d(angle: float) -> OperatorSpec:
    """Planar rotation by ``angle`` radians; both moduli equal ``cos(angle)``."""
    c = math.cos(angle)
    return OperatorSpec(
        kind="rotation2d",
        dim=2,
        matrix=_freeze(_rotation_matrix(angle)),
        offset=_freeze(np.zeros(2)),
        claims=(ModulusClaim(MONOTONE, c), ModulusClaim(COMONOTONE, c)),
    )


def scaled_identity_plus_rotation(scale: float, angle: float) -> OperatorSpec:
    """The planar operator ``c Id + R(angle)``.

    Writing the matrix as ``a I + b J`` with ``a = c + cos(angle)``,
    ``b = sin(angle)`` and ``J`` the quarter turn, the exact monotone modulus
    is ``a`` and the exact comonotone modulus is ``a / (a^2 + b^2)``.
    """
    a = float(scale) + math.cos(angle)
    b = math.sin(angle)
    claims = [ModulusClaim(MONOTONE, a)]
    if a * a + b * b > 0.0:
        claims.append(ModulusClaim(COMONOTONE, a / (a * a + b * b)))
    m = float(scale) * np.eye(2) + _rotation_matrix(angle)
    return OperatorSpec(
        kind="scaled_identity_plus_rotation",
        dim=2,
        matrix=_freeze(m),
        offset=_freeze(np.zeros(2)),
        claims=tuple(claims),
    )


def normal_cone_box(lower, upper) -> OperatorSpec:
    """Normal cone of the box ``[lower, upper]``; maximally monotone."""
    lo = np.asarray(lower, dtype=np.float64)
    hi = np.asarray(upper, dtype=np.float64)
    if lo.shape != hi.shape or lo.ndim != 1:
        raise ShapeError("box bounds must be 1-D arrays of equal length")
    if np.any(lo > hi):
        raise ParameterError("box lower bound exceeds upper bound")
    return OperatorSpec(
        kind="normal_cone_box",
        dim=lo.size,
        lower=_freeze(lo),
        upper=_freeze(hi),
        claims=(ModulusClaim(MONOTONE, 0.0),),
    )


def normal_cone_ball(center, radius: float) -> OperatorSpec:
    """Normal cone of the closed ball around ``center``; maximally monotone."""
    c = np.asarray(center, dtype=np.float64)
    if c.ndim != 1:
        raise ShapeError("ball center must be a 1-D array")
    if radius <= 0.0:
        raise ParameterError("ball radius must be positive")
    return OperatorSpec(
        kind="normal_cone_ball",
        dim=c.size,
        center=_freeze(c),
        radius=float(radius),
        claims=(ModulusClaim(MONOTONE, 0.0),),
    )


def sum_of_two(first: OperatorSpec, second: OperatorSpec) -> OperatorSpec:
    """Pointwise sum of two operators on the same space.

    A monotone claim with the summed moduli is attached when both parts carry
    one; comonotone moduli do not add and are not propagated.
    """
    if first.dim != second.dim:
        raise ShapeError("summands must share the same dimension")
    claims = ()
    ca, cb = first.claim(MONOTONE), second.claim(MONOTONE)
    if ca is not None and cb is not None:
        claims = (
            ModulusClaim(MONOTONE, ca.alpha + cb.alpha, ca.maximal and cb.maximal),
        )
    return OperatorSpec(
        kind="sum_of_two", dim=first.dim, parts=(first, second), claims=claims
    )


def evaluate(op: OperatorSpec, x) -> np.ndarray:
    """Evaluate a single-valued operator; batched over the leading axes.

    Set-valued kinds (normal cones) raise :class:`UnsupportedEvalError`; they
    act only through their resolvents.
    """
    if not op.single_valued:
        raise UnsupportedEvalError(
            f"operator kind {op.kind!r} is set-valued; evaluate its resolvent instead"
        )
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != op.dim:
        raise ShapeError(f"point has dimension {x.shape[-1]}, operator {op.dim}")
    if op.kind == "sum_of_two":
        return evaluate(op.parts[0], x) + evaluate(op.parts[1], x)
    return x @ op.matrix.T + op.offset


def as_map(op: OperatorSpec):
    """Return ``x -> op(x)`` as a batch-aware callable."""
    return lambda x: evaluate(op, x)


def relax_map(map_, factor: float):
    """The relaxation ``x -> (1 - factor) x + factor map(x)``."""
    if factor <= 0.0:
        raise ParameterError("relaxation factor must be positive")
    return lambda x: (1.0 - factor) * np.asarray(x, dtype=np.float64) + factor * apply_map(
        map_, x
    )


def apply_map(map_, points) -> np.ndarray:
    """Apply a point-map to one point or to rows of a ``(m, dim)`` batch.

    Tries a single batched call first and verifies it against a one-row
    evaluation; maps that do not broadcast row-wise fall back to a loop.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        out = np.asarray(map_(pts), dtype=np.float64)
        if out.shape != pts.shape:
            raise ShapeError(f"map returned shape {out.shape} for input {pts.shape}")
        return out
    try:
        out = np.asarray(map_(pts), dtype=np.float64)
    except Exception:
        out = None
    if out is not None and out.shape == pts.shape:
        probe = np.asarray(map_(pts[0]), dtype=np.float64)
        if probe.shape == pts[0].shape and np.allclose(
            out[0], probe, rtol=1e-9, atol=1e-12
        ):
            return out
    return np.stack([np.asarray(map_(row), dtype=np.float64) for row in pts])


@dataclass(frozen=True)
class Certificate:
    """Outcome of a sampled inequality check.

    ``worst_violation`` is the minimum over samples of the inequality slack
    normalised by ``1 + ||x - y||^2``; the verdict is ``pass`` iff it is at
    least ``-tolerance``.
    """

    flavor: str
    alpha: float
    sample_count: int
    worst_violation: float
    verdict: str
    tolerance: float = CERT_TOL

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def _pair_inner(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", u, v)


def _resolve_target(op_or_map, dim):
    if isinstance(op_or_map, OperatorSpec):
        return as_map(op_or_map), op_or_map.dim
    if dim is None:
        raise ParameterError("dim is required when certifying a bare point-map")
    return op_or_map, int(dim)


def _sampled_certificate(
    flavor, alpha, op_or_map, samples, seed, dim, radius, inner, slack_fn
) -> Certificate:
    if samples < 1:
        raise ParameterError("at least one sample pair is required")
    map_, dim = _resolve_target(op_or_map, dim)
    rng = np.random.default_rng(seed)
    x = radius * rng.standard_normal((samples, dim))
    y = radius * rng.standard_normal((samples, dim))
    tx = apply_map(map_, x)
    ty = apply_map(map_, y)
    pair = inner if inner is not None else _pair_inner
    sq = lambda u: pair(u, u)  # noqa: E731
    slack = slack_fn(x - y, tx - ty, pair, sq)
    scale = 1.0 + sq(x - y)
    normalised = slack / scale
    worst = float(np.min(normalised))
    verdict = "pass" if worst >= -CERT_TOL else "fail"
    return Certificate(flavor, float(alpha), samples, worst, verdict)


def certify_monotone(
    op_or_map,
    alpha: float,
    samples: int = 1000,
    seed: int = 0,
    *,
    dim: int | None = None,
    radius: float = DEFAULT_RADIUS,
    inner=None,
) -> Certificate:
    """Check ``<x - y, Ax - Ay> >= alpha ||x - y||^2`` on sampled pairs."""
    return _sampled_certificate(
        MONOTONE,
        alpha,
        op_or_map,
        samples,
        seed,
        dim,
        radius,
        inner,
        lambda dz, df, pair, sq: pair(dz, df) - alpha * sq(dz),
    )


def certify_comonotone(
    op_or_map,
    alpha: float,
    samples: int = 1000,
    seed: int = 0,
    *,
    dim: int | None = None,
    radius: float = DEFAULT_RADIUS,
    inner=None,
) -> Certificate:
    """Check ``<x - y, Ax - Ay> >= alpha ||Ax - Ay||^2`` on sampled pairs."""
    return _sampled_certificate(
        COMONOTONE,
        alpha,
        op_or_map,
        samples,
        seed,
        dim,
        radius,
        inner,
        lambda dz, df, pair, sq: pair(dz, df) - alpha * sq(df),
    )


def certify_cocoercive(
    map_,
    tau: float,
    samples: int = 1000,
    seed: int = 0,
    *,
    dim: int | None = None,
    radius: float = DEFAULT_RADIUS,
    inner=None,
) -> Certificate:
    """Check ``<x - y, Tx - Ty> >= tau ||Tx - Ty||^2`` on sampled pairs.

    ``tau = 1`` is the firmly nonexpansive case.
    """
    if tau <= 0.0:
        raise ParameterError("cocoercivity constant must be positive")
    return _sampled_certificate(
        "cocoercive",
        tau,
        map_,
        samples,
        seed,
        dim,
        radius,
        inner,
        lambda dz, df, pair, sq: pair(dz, df) - tau * sq(df),
    )


def certify_conically_averaged(
    map_,
    theta: float,
    samples: int = 1000,
    seed: int = 0,
    *,
    dim: int | None = None,
    radius: float = DEFAULT_RADIUS,
    inner=None,
) -> Certificate:
    """Check the conical averagedness inequality on sampled pairs.

    The displayed condition is
    ``||Tx - Ty||^2 <= ||x - y||^2 - ((1 - theta)/theta) ||(Id-T)x - (Id-T)y||^2``.
    ``theta`` may exceed 1.
    """
    if theta <= 0.0:
        raise ParameterError("averagedness constant must be positive")
    coeff = (1.0 - theta) / theta
    return _sampled_certificate(
        "conically_averaged",
        theta,
        map_,
        samples,
        seed,
        dim,
        radius,
        inner,
        lambda dz, df, pair, sq: sq(dz) - coeff * sq(dz - df) - sq(df),
    )
