"""Adaptive Douglas-Rachford operator, parameter validation, and the
fixed-point iteration engine with shadow-sequence tracking.

The operator is ``T = (1 - kappa) Id + kappa R2 R1`` where ``R1`` is the
lambda-relaxed resolvent of ``gamma * A`` and ``R2`` the mu-relaxed resolvent
of ``delta * B``, coupled through ``lambda = 1 + delta/gamma`` and
``mu = 1 + gamma/delta`` (so ``(lambda-1)(mu-1) = 1``). Under the validated
regimes ``T`` is averaged, hence single-valued, and the iteration is the
plain equality ``x_{k+1} = T(x_k)``. The displacement identity
``Id - T = kappa * mu * (J1 - J2 R1)`` is tracked at every step, and the
shadow ``J1(x_k)`` of a converged run solves the inclusion ``0 in Ax + Bx``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .demiclosedness import SequenceWindow
from .errors import ParameterError, ShapeError, UnsupportedOperatorError, ValidationError
from .operators import COMONOTONE, MONOTONE, OperatorSpec, evaluate
from .resolvents import ResolventHandle, relaxed_resolve, resolve

__all__ = [
    "ADRParams",
    "ConditionCheck",
    "ValidationReport",
    "IterationRecord",
    "IterationTrace",
    "derive_relaxations",
    "kappa_bound",
    "validate",
    "adr_step",
    "run",
    "inclusion_residual",
    "shadow_premises",
    "ShadowPremises",
]

REGIMES = (MONOTONE, COMONOTONE)

EQUALITY_TOL = 1e-12
DIVERGENCE_NORM = 1e12
DEFAULT_STEP_TOL = 1e-10
DEFAULT_MAX_ITERS = 100_000
DEFAULT_DIM_CAP = 16

# membership band used when classifying a point against a normal-cone set
CONE_BOUNDARY_TOL = 1e-9


def derive_relaxations(gamma: float, delta: float) -> tuple[float, float]:
    """Relaxation pair ``(1 + delta/gamma, 1 + gamma/delta)``.

    The two overrelaxations multiply out to ``(lambda-1)(mu-1) = 1``;
    ``gamma = delta`` gives the classical pair ``(2, 2)``.
    """
    if gamma <= 0.0 or delta <= 0.0:
        raise ParameterError("step sizes gamma and delta must be positive")
    return 1.0 + delta / gamma, 1.0 + gamma / delta


def _zero_sum(alpha: float, beta: float) -> bool:
    return abs(alpha + beta) <= EQUALITY_TOL * (1.0 + abs(alpha) + abs(beta))


def kappa_bound(
    gamma: float, delta: float, alpha: float, beta: float, regime: str
) -> float:
    """Upper bound on the relaxation ``kappa`` for the declared regime.

    Equals 1 when ``alpha + beta = 0``; otherwise the regime-specific
    quotient. Raises :class:`ValidationError` naming the failed condition
    when the regime preconditions do not hold.
    """
    report = validate(
        ADRParams.create(gamma, delta, alpha, beta, regime, kappa=None),
        check_kappa=False,
    )
    if not report.passed:
        raise ValidationError(
            "regime validation failed: " + ", ".join(report.failed),
            failed=report.failed,
        )
    return _kappa_bound_value(gamma, delta, alpha, beta, regime)


def _kappa_bound_value(gamma, delta, alpha, beta, regime) -> float:
    if _zero_sum(alpha, beta):
        return 1.0
    s = alpha + beta
    if s < 0.0:
        return math.nan
    if regime == MONOTONE:
        num = 4.0 * gamma * delta * (1.0 + gamma * alpha) * (1.0 + delta * beta)
        num -= (gamma + delta) ** 2
        return num / (2.0 * gamma * delta * (gamma + delta) * s)
    num = 4.0 * (gamma + alpha) * (delta + beta) - (gamma + delta) ** 2
    return num / (2.0 * (gamma + delta) * s)


@dataclass(frozen=True)
class ADRParams:
    """Step sizes, moduli, relaxation, and the derived constants.

    ``lam``/``mu``/``kappa_bar`` are derived on creation; they are ``nan``
    when the inputs make them undefined, which :func:`validate` then reports.
    ``shadow_mode`` switches on the extra comonotone balance condition needed
    by the shadow-sequence guarantee.
    """

    gamma: float
    delta: float
    alpha: float
    beta: float
    regime: str
    kappa: float
    shadow_mode: bool = False
    lam: float = math.nan
    mu: float = math.nan
    kappa_bar: float = math.nan

    @staticmethod
    def create(
        gamma: float,
        delta: float,
        alpha: float,
        beta: float,
        regime: str,
        kappa: float | None = None,
        shadow_mode: bool = False,
    ) -> "ADRParams":
        """Build a parameter set, deriving ``lam``, ``mu`` and ``kappa_bar``.

        ``kappa=None`` selects the midpoint ``kappa_bar / 2`` of the
        admissible interval.
        """
        if regime not in REGIMES:
            raise ParameterError(f"regime must be one of {REGIMES}, got {regime!r}")
        gamma, delta = float(gamma), float(delta)
        alpha, beta = float(alpha), float(beta)
        if gamma > 0.0 and delta > 0.0:
            lam, mu = derive_relaxations(gamma, delta)
            kb = _kappa_bound_value(gamma, delta, alpha, beta, regime)
        else:
            lam = mu = kb = math.nan
        if kappa is None:
            kappa = kb / 2.0
        return ADRParams(
            gamma=gamma,
            delta=delta,
            alpha=alpha,
            beta=beta,
            regime=regime,
            kappa=float(kappa),
            shadow_mode=shadow_mode,
            lam=lam,
            mu=mu,
            kappa_bar=kb,
        )

    def with_kappa(self, kappa: float) -> "ADRParams":
        return replace(self, kappa=float(kappa))

    @property
    def monotone_constants(self) -> tuple[float, float]:
        """Cocoercivity constants ``(1 + gamma*alpha, 1 + delta*beta)``."""
        return 1.0 + self.gamma * self.alpha, 1.0 + self.delta * self.beta

    @property
    def averaged_constants(self) -> tuple[float, float]:
        """Conical constants ``(gamma/(2(gamma+alpha)), delta/(2(delta+beta)))``."""
        return (
            self.gamma / (2.0 * (self.gamma + self.alpha)),
            self.delta / (2.0 * (self.delta + self.beta)),
        )

    @property
    def shadow_weights(self) -> tuple[float, float]:
        """The weights ``(lambda - 1, 1)`` used by the shadow-sequence analysis."""
        return self.lam - 1.0, 1.0


@dataclass(frozen=True)
class ConditionCheck:
    """One validated condition.

    For inequalities ``slack = rhs - lhs`` (a margin, positive means
    satisfied); for equality conditions ``slack = -|lhs - rhs|`` so that a
    perfect match reports zero. Strict inequalities pass only with strictly
    positive slack; equality and non-strict conditions absorb a ``1e-12``
    relative shortfall.
    """

    name: str
    detail: str
    lhs: float
    rhs: float
    slack: float
    passed: bool


@dataclass(frozen=True)
class ValidationReport:
    regime: str
    conditions: tuple[ConditionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.conditions if not c.passed]

    def __str__(self) -> str:
        lines = [f"regime: {self.regime}"]
        for c in self.conditions:
            mark = "pass" if c.passed else "FAIL"
            lines.append(f"  [{mark}] {c.name}: {c.detail} (slack {c.slack:.3e})")
        return "\n".join(lines)


def _strict(name, detail, lhs, rhs) -> ConditionCheck:
    slack = rhs - lhs
    return ConditionCheck(name, detail, lhs, rhs, slack, bool(slack > 0.0))


def _nonstrict(name, detail, lhs, rhs, scale=1.0) -> ConditionCheck:
    slack = rhs - lhs
    return ConditionCheck(
        name, detail, lhs, rhs, slack, bool(slack >= -EQUALITY_TOL * scale)
    )


def _equality(name, detail, lhs, rhs) -> ConditionCheck:
    slack = -abs(lhs - rhs)
    tol = EQUALITY_TOL * (1.0 + abs(rhs))
    return ConditionCheck(name, detail, lhs, rhs, slack, bool(-slack <= tol))


def validate(p: ADRParams, check_kappa: bool = True) -> ValidationReport:
    """Evaluate every admissibility condition for the declared regime.

    Produces a report (never raises): each displayed condition with its
    numeric slack and verdict. Strict inequalities are validated with zero
    slack tolerance, equality conditions with a ``1e-12`` relative one.
    """
    g, d, a, b = p.gamma, p.delta, p.alpha, p.beta
    checks = [
        _strict("gamma_positive", f"gamma = {g} > 0", 0.0, g),
        _strict("delta_positive", f"delta = {d} > 0", 0.0, d),
    ]
    if g > 0.0 and d > 0.0:
        checks.append(
            _equality(
                "relaxation_product",
                "(lambda-1)(mu-1) = 1",
                (p.lam - 1.0) * (p.mu - 1.0),
                1.0,
            )
        )
    checks.append(
        _nonstrict(
            "moduli_sum_nonnegative",
            f"alpha + beta = {a + b} >= 0",
            0.0,
            a + b,
            scale=1.0 + abs(a) + abs(b),
        )
    )
    if g > 0.0 and d > 0.0:
        zero_sum = _zero_sum(a, b)
        positive_sum = not zero_sum and a + b > 0.0
        if p.regime == MONOTONE:
            if zero_sum:
                checks.append(
                    _equality(
                        "exact_step_balance",
                        "delta (1 + 2 gamma alpha) = gamma",
                        d * (1.0 + 2.0 * g * a),
                        g,
                    )
                )
            elif positive_sum:
                checks.append(
                    _strict(
                        "contraction_window",
                        "(gamma+delta)^2 < 4 gamma delta (1+gamma alpha)(1+delta beta)",
                        (g + d) ** 2,
                        4.0 * g * d * (1.0 + g * a) * (1.0 + d * b),
                    )
                )
            checks.append(
                _strict("resolvent_regime_a", "1 + gamma alpha > 0", 0.0, 1.0 + g * a)
            )
            checks.append(
                _strict("resolvent_regime_b", "1 + delta beta > 0", 0.0, 1.0 + d * b)
            )
        else:
            if zero_sum:
                checks.append(
                    _equality(
                        "exact_step_balance", "delta = gamma + 2 alpha", d, g + 2.0 * a
                    )
                )
            elif positive_sum:
                checks.append(
                    _strict(
                        "contraction_window",
                        "(gamma+delta)^2 < 4 (gamma+alpha)(delta+beta)",
                        (g + d) ** 2,
                        4.0 * (g + a) * (d + b),
                    )
                )
            checks.append(
                _strict("resolvent_regime_a", "gamma + alpha > 0", 0.0, g + a)
            )
            checks.append(
                _strict("resolvent_regime_b", "delta + beta > 0", 0.0, d + b)
            )
            if p.shadow_mode:
                checks.append(
                    _nonstrict(
                        "shadow_balance",
                        "gamma + delta <= min(2(gamma+alpha), 2(delta+beta))",
                        g + d,
                        min(2.0 * (g + a), 2.0 * (d + b)),
                        scale=1.0 + g + d,
                    )
                )
    if check_kappa:
        checks.append(_strict("kappa_positive", f"kappa = {p.kappa} > 0", 0.0, p.kappa))
        checks.append(
            _strict(
                "kappa_below_bound",
                f"kappa = {p.kappa} < kappa_bar = {p.kappa_bar}",
                p.kappa,
                p.kappa_bar,
            )
        )
    return ValidationReport(p.regime, tuple(checks))


def _require_handles(p: ADRParams, h1: ResolventHandle, h2: ResolventHandle):
    if h1.gamma != p.gamma or h2.gamma != p.delta:
        raise ParameterError(
            "resolvent handles must be built with the parameter step sizes "
            f"(gamma={p.gamma}, delta={p.delta}); got ({h1.gamma}, {h2.gamma})"
        )


def adr_step(p: ADRParams, h1: ResolventHandle, h2: ResolventHandle, x) -> np.ndarray:
    """One application of the operator ``(1-kappa) Id + kappa R2 R1``."""
    _require_handles(p, h1, h2)
    x = np.asarray(x, dtype=np.float64)
    r1 = relaxed_resolve(h1, p.lam, x)
    r2 = relaxed_resolve(h2, p.mu, r1)
    return (1.0 - p.kappa) * x + p.kappa * r2


@dataclass(frozen=True)
class IterationRecord:
    """Per-iteration diagnostics; vectors are kept only up to the dim cap."""

    k: int
    step_residual: float
    split_gap: float
    identity_residual: float
    shadow_inclusion_residual: float | None
    x: np.ndarray | None = None
    shadow: np.ndarray | None = None


@dataclass
class IterationTrace:
    records: list[IterationRecord]
    status: str  # converged | max_iters | diverged
    final_x: np.ndarray
    final_shadow: np.ndarray
    max_identity_ratio: float = 0.0

    @property
    def iterations(self) -> int:
        return self.records[-1].k if self.records else 0

    @property
    def step_residuals(self) -> np.ndarray:
        return np.array([r.step_residual for r in self.records])

    @property
    def xs(self) -> np.ndarray:
        """Stacked iterates; available only when the dimension fits the cap."""
        if any(r.x is None for r in self.records):
            raise ShapeError(
                "iterate vectors were not stored (dimension exceeds the trace cap)"
            )
        return np.stack([r.x for r in self.records])


def run(
    p: ADRParams,
    h1: ResolventHandle,
    h2: ResolventHandle,
    x0,
    max_iters: int = DEFAULT_MAX_ITERS,
    step_tol: float = DEFAULT_STEP_TOL,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> IterationTrace:
    """Iterate ``x_{k+1} = T(x_k)`` recording the full diagnostic trace.

    Stops when ``||x_k - x_{k+1}|| <= step_tol`` (status ``converged``), when
    ``max_iters`` steps were taken (status ``max_iters``), or when the
    iterate norm passes the divergence guard (status ``diverged``).
    """
    _require_handles(p, h1, h2)
    report = validate(p)
    if not report.passed:
        raise ValidationError(
            "cannot run with invalid parameters: " + ", ".join(report.failed),
            failed=report.failed,
        )
    x = np.asarray(x0, dtype=np.float64).copy()
    if x.ndim != 1 or x.shape[0] != h1.dim:
        raise ShapeError(f"x0 must be a vector of dimension {h1.dim}")
    keep_vectors = x.shape[0] <= dim_cap
    records: list[IterationRecord] = []
    status = "max_iters"
    max_ratio = 0.0
    for k in range(max_iters):
        if float(np.linalg.norm(x)) > DIVERGENCE_NORM:
            status = "diverged"
            break
        j1 = resolve(h1, x)
        r1 = (1.0 - p.lam) * x + p.lam * j1
        j2 = resolve(h2, r1)
        r2 = (1.0 - p.mu) * r1 + p.mu * j2
        x_next = (1.0 - p.kappa) * x + p.kappa * r2

        displacement = x - x_next
        step_residual = float(np.linalg.norm(displacement))
        split_gap = float(np.linalg.norm(j1 - j2))
        identity_residual = float(
            np.linalg.norm(displacement - p.kappa * p.mu * (j1 - j2))
        )
        max_ratio = max(
            max_ratio, identity_residual / (1.0 + float(np.linalg.norm(x)))
        )
        try:
            incl = inclusion_residual(h1.op, h2.op, j1)
        except UnsupportedOperatorError:
            incl = None
        records.append(
            IterationRecord(
                k=k,
                step_residual=step_residual,
                split_gap=split_gap,
                identity_residual=identity_residual,
                shadow_inclusion_residual=incl,
                x=x.copy() if keep_vectors else None,
                shadow=j1.copy() if keep_vectors else None,
            )
        )
        x = x_next
        if step_residual <= step_tol:
            status = "converged"
            break
    return IterationTrace(
        records=records,
        status=status,
        final_x=x,
        final_shadow=resolve(h1, x),
        max_identity_ratio=max_ratio,
    )


def _cone_distance_box(op: OperatorSpec, x: np.ndarray, v: np.ndarray) -> float:
    lo, hi = op.lower, op.upper
    band = CONE_BOUNDARY_TOL * (1.0 + np.maximum(np.abs(lo), np.abs(hi)))
    if np.any(x < lo - band) or np.any(x > hi + band):
        return math.inf
    at_lower = x <= lo + band
    at_upper = x >= hi - band
    # free coordinate: cone component {0}; at a bound, the admissible
    # half-line absorbs one sign of v
    dist_sq = 0.0
    for xi_lo, xi_hi, vi in zip(at_lower, at_upper, v):
        if xi_lo and xi_hi:
            continue  # degenerate interval: cone is the whole line
        if xi_lo:
            dist_sq += max(vi, 0.0) ** 2
        elif xi_hi:
            dist_sq += min(vi, 0.0) ** 2
        else:
            dist_sq += vi**2
    return math.sqrt(dist_sq)


def _cone_distance_ball(op: OperatorSpec, x: np.ndarray, v: np.ndarray) -> float:
    shifted = x - op.center
    dist = float(np.linalg.norm(shifted))
    band = CONE_BOUNDARY_TOL * (1.0 + op.radius)
    if dist > op.radius + band:
        return math.inf
    if dist < op.radius - band:
        return float(np.linalg.norm(v))
    direction = shifted / dist if dist > 0.0 else np.zeros_like(shifted)
    along = max(float(np.dot(v, direction)), 0.0)
    return float(np.linalg.norm(v - along * direction))


def inclusion_residual(a_op: OperatorSpec, b_op: OperatorSpec, x) -> float:
    """How far ``x`` is from solving ``0 in A x + B x``.

    For two single-valued operators this is ``||A(x) + B(x)||``. When exactly
    one operand is a normal cone, it is the distance from minus the other
    operand's value to the cone at ``x`` (infinite when ``x`` is outside the
    set). Two set-valued operands are unsupported.
    """
    x = np.asarray(x, dtype=np.float64)
    a_single, b_single = a_op.single_valued, b_op.single_valued
    if a_single and b_single:
        return float(np.linalg.norm(evaluate(a_op, x) + evaluate(b_op, x)))
    if a_single != b_single:
        cone, point_map = (b_op, a_op) if a_single else (a_op, b_op)
        v = -evaluate(point_map, x)
        if cone.kind == "normal_cone_box":
            return _cone_distance_box(cone, x, v)
        if cone.kind == "normal_cone_ball":
            return _cone_distance_ball(cone, x, v)
    raise UnsupportedOperatorError(
        f"no closed-form inclusion residual for kinds "
        f"({a_op.kind!r}, {b_op.kind!r})"
    )


@dataclass(frozen=True)
class ShadowPremises:
    """Window and inputs for checking the shadow-sequence premise bundles."""

    window: SequenceWindow
    maps: tuple
    rho: tuple[float, float]
    tau: tuple[float, float]
    thetas: tuple[float, float]


def shadow_premises(
    xs: np.ndarray,
    p: ADRParams,
    h1: ResolventHandle,
    h2: ResolventHandle,
    x_star,
    y_star=None,
) -> ShadowPremises:
    """Assemble the two-slot window used by the shadow-sequence analysis.

    Slot 1 carries the iterates ``x_k`` with limit ``x_star``; slot 2 carries
    ``z_k = R1(x_k)`` with the induced limit ``(1-lambda) x* + lambda y*``.
    ``y_star`` defaults to ``J1(x_star)``. The returned weights are
    ``rho = (lambda - 1, 1)`` with the regime-specific constants.
    """
    _require_handles(p, h1, h2)
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2:
        raise ShapeError("xs must be a (K, dim) array of iterates")
    x_star = np.asarray(x_star, dtype=np.float64)
    y_star = resolve(h1, x_star) if y_star is None else np.asarray(y_star, float)
    z_star = (1.0 - p.lam) * x_star + p.lam * y_star
    zs = relaxed_resolve(h1, p.lam, xs)
    window = SequenceWindow(
        slots=(xs, zs), limits=(x_star, z_star), y=y_star
    )
    return ShadowPremises(
        window=window,
        maps=(h1.map, h2.map),
        rho=p.shadow_weights,
        tau=p.monotone_constants,
        thetas=p.averaged_constants,
    )
