"""Balance conditions, premise diagnostics, and conclusion checks for
multi-operator demiclosedness.

The convergence hypotheses are phrased for weak limits; at finite dimension
weak and strong convergence coincide, so the checkers measure strong
residuals against caller-supplied claimed limits. A "goes to zero" condition
passes when the final-quarter mean of its residual series drops below
``max(atol, rtol * initial)``. The checkers never estimate limits
themselves; callers provide them (typically from a long solver run).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ShapeError, UsageError
from .operators import apply_map

__all__ = [
    "SequenceWindow",
    "BalanceReport",
    "TrendVerdict",
    "ConditionDiagnostics",
    "ConclusionReport",
    "balance_cocoercive",
    "balance_averaged",
    "lift_to_product",
    "averaged_to_fne",
    "fne_to_averaged",
    "check_cocoercive_premises",
    "check_averaged_premises",
    "verify_conclusion",
]

BALANCE_TOL = 1e-12
TREND_ATOL = 1e-8
TREND_RTOL = 1e-6


@dataclass(frozen=True)
class SequenceWindow:
    """Finite sequences for ``n`` operator slots plus optional claimed limits.

    ``slots[i]`` has shape ``(K, dim)``: iterate ``k`` of slot ``i`` is
    ``slots[i][k]``. All slots share ``K >= 1`` and ``dim``.
    """

    slots: tuple[np.ndarray, ...]
    limits: tuple[np.ndarray, ...] | None = None
    y: np.ndarray | None = None

    def __post_init__(self):
        slots = tuple(np.asarray(s, dtype=np.float64) for s in self.slots)
        if not slots:
            raise ShapeError("a window needs at least one slot")
        shape = slots[0].shape
        if len(shape) != 2 or shape[0] < 1:
            raise ShapeError("each slot must be a (K, dim) array with K >= 1")
        if any(s.shape != shape for s in slots):
            raise ShapeError("all slots must share window length and dimension")
        object.__setattr__(self, "slots", slots)
        if self.limits is not None:
            lims = tuple(np.asarray(v, dtype=np.float64) for v in self.limits)
            if len(lims) != len(slots) or any(
                v.shape != (shape[1],) for v in lims
            ):
                raise ShapeError("claimed limits must match slot count and dim")
            object.__setattr__(self, "limits", lims)
        if self.y is not None:
            yv = np.asarray(self.y, dtype=np.float64)
            if yv.shape != (shape[1],):
                raise ShapeError("claimed y must match the slot dimension")
            object.__setattr__(self, "y", yv)

    @property
    def n_slots(self) -> int:
        return len(self.slots)

    @property
    def length(self) -> int:
        return self.slots[0].shape[0]

    @property
    def dim(self) -> int:
        return self.slots[0].shape[1]

    def require_limits(self):
        if self.limits is None or self.y is None:
            raise UsageError(
                "this check needs claimed limits (per-slot x_i and y) on the window"
            )
        return self.limits, self.y


@dataclass(frozen=True)
class BalanceReport:
    """Outcome of a balance condition on cocoercivity/averagedness constants.

    ``slack`` is the raw margin to the threshold (no tolerance folded in);
    the verdict allows a ``1e-12`` shortfall to absorb roundoff.
    """

    weighted_average: float
    threshold: float
    slack: float
    verdict: str

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def balance_cocoercive(rho, tau) -> BalanceReport:
    """Weighted-average balance for cocoercive constants.

    Passes when ``sum(rho_i tau_i) / sum(rho_i) >= 1`` (within tolerance).
    """
    rho = np.asarray(rho, dtype=np.float64)
    tau = np.asarray(tau, dtype=np.float64)
    if rho.shape != tau.shape or rho.ndim != 1 or rho.size < 1:
        raise ShapeError("rho and tau must be 1-D sequences of equal length")
    if np.any(rho <= 0.0) or np.any(tau <= 0.0):
        raise ParameterError("all weights and constants must be positive")
    avg = float(np.dot(rho, tau) / np.sum(rho))
    slack = avg - 1.0
    return BalanceReport(
        weighted_average=avg,
        threshold=1.0,
        slack=slack,
        verdict="pass" if slack >= -BALANCE_TOL else "fail",
    )


def balance_averaged(
    theta1: float, theta2: float, rho1: float, rho2: float
) -> BalanceReport:
    """Componentwise balance for two averagedness constants.

    Passes when ``theta1 <= rho2/(rho1+rho2)`` and
    ``theta2 <= rho1/(rho1+rho2)`` (within tolerance). ``slack`` is the
    smaller of the two margins; ``weighted_average`` reports
    ``(rho1 theta1 + rho2 theta2)/(rho1+rho2)``, which the condition forces
    to be at most one half.
    """
    if min(theta1, theta2, rho1, rho2) <= 0.0:
        raise ParameterError("all constants and weights must be positive")
    total = rho1 + rho2
    slack = min(rho2 / total - theta1, rho1 / total - theta2)
    return BalanceReport(
        weighted_average=(rho1 * theta1 + rho2 * theta2) / total,
        threshold=0.5,
        slack=slack,
        verdict="pass" if slack >= -BALANCE_TOL else "fail",
    )


def lift_to_product(maps, tau, omega):
    """Block map ``z -> (tau_i F_i(z_i))`` on the flat product space.

    With each ``F_i`` being ``tau_i``-cocoercive, the lifted map is firmly
    nonexpansive in the product metric weighted by ``omega``; this is what
    the property tests certify. ``omega`` takes part only in that metric,
    not in the map itself.
    """
    tau = np.asarray(tau, dtype=np.float64)
    omega = np.asarray(omega, dtype=np.float64)
    n = len(maps)
    if tau.shape != (n,) or omega.shape != (n,):
        raise ShapeError("maps, tau, and omega must have equal length")
    if np.any(tau <= 0.0) or np.any(omega <= 0.0):
        raise ParameterError("tau and omega entries must be positive")

    def lifted(z):
        z = np.asarray(z, dtype=np.float64)
        if z.shape[-1] % n:
            raise ShapeError(
                f"product vector length {z.shape[-1]} is not divisible by {n} blocks"
            )
        d = z.shape[-1] // n
        blocks = z.reshape(z.shape[:-1] + (n, d))
        out = [tau[i] * apply_map(maps[i], blocks[..., i, :]) for i in range(n)]
        return np.stack(out, axis=-2).reshape(z.shape)

    return lifted


def averaged_to_fne(map_, theta: float):
    """Transform a conically ``theta``-averaged map into a firmly nonexpansive one.

    Returns ``Id - (Id - T) / (2 theta)``; at ``theta = 1/2`` this is ``T``
    itself.
    """
    if theta <= 0.0:
        raise ParameterError("averagedness constant must be positive")

    def fne(z):
        z = np.asarray(z, dtype=np.float64)
        return z - (z - apply_map(map_, z)) / (2.0 * theta)

    return fne


def fne_to_averaged(map_, theta: float):
    """Inverse of :func:`averaged_to_fne`: ``(1 - 2 theta) Id + 2 theta F``."""
    if theta <= 0.0:
        raise ParameterError("averagedness constant must be positive")

    def averaged(z):
        z = np.asarray(z, dtype=np.float64)
        return (1.0 - 2.0 * theta) * z + 2.0 * theta * apply_map(map_, z)

    return averaged


@dataclass(frozen=True)
class TrendVerdict:
    """Trend statistics for one residual series."""

    final_quarter_mean: float
    initial: float
    threshold: float
    log_slope: float
    passed: bool


def _trend(series: np.ndarray, atol: float, rtol: float) -> TrendVerdict:
    k = series.size
    quarter = max(1, math.ceil(k / 4))
    fq_mean = float(np.mean(series[-quarter:]))
    initial = float(series[0])
    threshold = max(atol, rtol * initial)
    positive = series > 0.0
    if np.count_nonzero(positive) >= 2:
        idx = np.nonzero(positive)[0]
        slope = float(np.polyfit(idx, np.log10(series[idx]), 1)[0])
    else:
        slope = 0.0
    return TrendVerdict(fq_mean, initial, threshold, slope, fq_mean <= threshold)


@dataclass
class ConditionDiagnostics:
    """Residual series and trend verdicts for a premise bundle.

    Keys ``a`` to ``d`` follow the order of the convergence conditions:
    per-slot limits, map limits, the aggregate sum condition, and the
    pairwise gap condition. Each series has one value per window index.
    """

    residuals: dict[str, np.ndarray]
    trends: dict[str, TrendVerdict]
    descriptions: dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.trends.values())


def _diagnostics(series: dict[str, np.ndarray], descriptions, atol, rtol):
    trends = {key: _trend(values, atol, rtol) for key, values in series.items()}
    return ConditionDiagnostics(series, trends, descriptions)


def _slot_images(window: SequenceWindow, maps) -> list[np.ndarray]:
    if len(maps) != window.n_slots:
        raise ShapeError("one map per window slot is required")
    return [apply_map(maps[i], window.slots[i]) for i in range(window.n_slots)]


def _max_over_slots(arrays: list[np.ndarray]) -> np.ndarray:
    return np.max(np.stack(arrays, axis=0), axis=0)


def check_cocoercive_premises(
    window: SequenceWindow,
    maps,
    rho,
    tau,
    mode: str = "balanced",
    *,
    atol: float = TREND_ATOL,
    rtol: float = TREND_RTOL,
) -> ConditionDiagnostics:
    """Residual diagnostics for the cocoercive premise bundle.

    ``raw`` mode tracks the sum condition with the cocoercivity constants
    inside, converging to ``-(sum rho_i tau_i) y + sum rho_i x_i``;
    ``balanced`` mode tracks the constant-free sum converging to
    ``-(sum rho_i) y + sum rho_i x_i`` (the corresponding balance condition
    is checked separately via :func:`balance_cocoercive`).
    """
    if mode not in ("raw", "balanced"):
        raise ParameterError(f"unknown mode {mode!r}")
    limits, y = window.require_limits()
    n = window.n_slots
    rho = np.asarray(rho, dtype=np.float64)
    tau = np.asarray(tau, dtype=np.float64)
    if rho.shape != (n,) or tau.shape != (n,):
        raise ShapeError("rho and tau must carry one entry per slot")
    if np.any(rho <= 0.0) or np.any(tau <= 0.0):
        raise ParameterError("rho and tau entries must be positive")

    images = _slot_images(window, maps)
    a = _max_over_slots(
        [np.linalg.norm(window.slots[i] - limits[i], axis=1) for i in range(n)]
    )
    b = _max_over_slots([np.linalg.norm(images[i] - y, axis=1) for i in range(n)])
    if mode == "raw":
        running = sum(
            rho[i] * (window.slots[i] - tau[i] * images[i]) for i in range(n)
        )
        target = -float(np.dot(rho, tau)) * y + sum(
            rho[i] * limits[i] for i in range(n)
        )
    else:
        running = sum(rho[i] * (window.slots[i] - images[i]) for i in range(n))
        target = -float(np.sum(rho)) * y + sum(rho[i] * limits[i] for i in range(n))
    c = np.linalg.norm(running - target, axis=1)
    gaps = [
        np.linalg.norm(images[i] - images[j], axis=1)
        for i in range(n)
        for j in range(i + 1, n)
    ]
    d = _max_over_slots(gaps) if gaps else np.zeros(window.length)

    return _diagnostics(
        {"a": a, "b": b, "c": c, "d": d},
        {
            "a": "slot iterates approach their claimed limits",
            "b": "mapped iterates approach the claimed common value",
            "c": f"aggregate sum condition ({mode} mode)",
            "d": "pairwise gaps between mapped iterates vanish",
        },
        atol,
        rtol,
    )


def check_averaged_premises(
    window: SequenceWindow,
    maps,
    theta,
    variant: str = "general",
    rho=None,
    *,
    atol: float = TREND_ATOL,
    rtol: float = TREND_RTOL,
) -> ConditionDiagnostics:
    """Residual diagnostics for the conically averaged premise bundle.

    In the ``general`` variant the slot-``i`` map limit is
    ``2 theta_i y + (1 - 2 theta_i) x_i`` and the sum condition divides each
    displacement by ``2 theta_i``. The ``two_balanced`` variant (exactly two
    slots, requires ``rho``) tracks the constant-free conditions: both maps
    approach ``y`` and ``rho_1 (x_1k - T_1 x_1k) + rho_2 (x_2k - T_2 x_2k)``
    vanishes.
    """
    if variant not in ("general", "two_balanced"):
        raise ParameterError(f"unknown variant {variant!r}")
    limits, y = window.require_limits()
    n = window.n_slots
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (n,):
        raise ShapeError("theta must carry one entry per slot")
    if np.any(theta <= 0.0):
        raise ParameterError("theta entries must be positive")

    images = _slot_images(window, maps)
    a = _max_over_slots(
        [np.linalg.norm(window.slots[i] - limits[i], axis=1) for i in range(n)]
    )

    if variant == "general":
        targets = [2.0 * theta[i] * y + (1.0 - 2.0 * theta[i]) * limits[i] for i in range(n)]
        b = _max_over_slots(
            [np.linalg.norm(images[i] - targets[i], axis=1) for i in range(n)]
        )
        scaled = [
            (window.slots[i] - images[i]) / (2.0 * theta[i]) for i in range(n)
        ]
        running = sum(scaled)
        target = -float(n) * y + sum(limits)
        c = np.linalg.norm(running - target, axis=1)
        gaps = [
            np.linalg.norm(
                (window.slots[i] - window.slots[j]) - (scaled[i] - scaled[j]), axis=1
            )
            for i in range(n)
            for j in range(i + 1, n)
        ]
        d = _max_over_slots(gaps) if gaps else np.zeros(window.length)
        desc_b = "mapped iterates approach 2*theta_i*y + (1-2*theta_i)*x_i"
        desc_c = "displacements scaled by 1/(2 theta_i) satisfy the sum condition"
        desc_d = "cross-slot displacement differences vanish"
    else:
        if n != 2:
            raise ShapeError("the two_balanced variant needs exactly two slots")
        if rho is None:
            raise UsageError("the two_balanced variant needs the weights rho")
        rho = np.asarray(rho, dtype=np.float64)
        if rho.shape != (2,) or np.any(rho <= 0.0):
            raise ParameterError("rho must be two positive weights")
        b = _max_over_slots(
            [np.linalg.norm(images[i] - y, axis=1) for i in range(2)]
        )
        running = rho[0] * (window.slots[0] - images[0]) + rho[1] * (
            window.slots[1] - images[1]
        )
        c = np.linalg.norm(running, axis=1)
        d = np.linalg.norm(images[0] - images[1], axis=1)
        desc_b = "both mapped iterates approach the claimed common value"
        desc_c = "rho-weighted displacement sum vanishes"
        desc_d = "gap between the two mapped iterates vanishes"

    return _diagnostics(
        {"a": a, "b": b, "c": c, "d": d},
        {
            "a": "slot iterates approach their claimed limits",
            "b": desc_b,
            "c": desc_c,
            "d": desc_d,
        },
        atol,
        rtol,
    )


@dataclass(frozen=True)
class ConclusionReport:
    residuals: np.ndarray
    tol: float
    passed: bool


def verify_conclusion(maps, points, y, tol: float, thetas=None) -> ConclusionReport:
    """Check the demiclosedness conclusion at the claimed limits.

    Without ``thetas`` the asserted identity is ``F_i(x_i) = y`` for every
    slot; with ``thetas`` it is ``T_i(x_i) = 2 theta_i y + (1 - 2 theta_i) x_i``.
    """
    y = np.asarray(y, dtype=np.float64)
    pts = [np.asarray(p, dtype=np.float64) for p in points]
    if len(maps) != len(pts):
        raise ShapeError("one map per point is required")
    residuals = []
    for i, (map_, x) in enumerate(zip(maps, pts)):
        if thetas is None:
            target = y
        else:
            target = 2.0 * thetas[i] * y + (1.0 - 2.0 * thetas[i]) * x
        residuals.append(float(np.linalg.norm(apply_map(map_, x) - target)))
    residuals = np.asarray(residuals)
    return ConclusionReport(residuals, tol, bool(np.max(residuals) <= tol))
