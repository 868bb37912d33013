"""Command-line front end.

Subcommands
-----------
``validate``
    Check a problem configuration against every admissibility condition.
``run``
    Execute one solver run, writing a JSONL trace and a summary CSV row.
``sweep``
    Run a parameter grid, one trace per cell plus an aggregate CSV.
``certify``
    Sample-check a claimed modulus or resolvent constant.
``demi-check``
    Replay a trace against the shadow-sequence premise diagnostics.

Configurations are JSON files with a ``schema_version`` field; unknown keys
are rejected. Floats in trace and CSV artifacts are serialized with 17
significant digits, so identical configs and seeds produce byte-identical
files. Exit codes: 0 success, 1 numeric or validation failure, 2 usage or
parse failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import adr, demiclosedness, operators, resolvents
from .errors import AdrSplitError, ConfigError, UsageError

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

SUMMARY_HEADER = (
    "status,iterations,final_step_residual,final_shadow_inclusion_residual"
)
SWEEP_HEADER = (
    "cell,gamma,delta,kappa,seed,status,iterations,"
    "final_step_residual,final_shadow_inclusion_residual,failed_conditions"
)

TRACE_KEYS = (
    "k",
    "step_residual",
    "split_gap",
    "identity_residual",
    "shadow_inclusion_residual",
)


# ---------------------------------------------------------------------------
# deterministic serialization


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v))
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ",".join(_json_value(u) for u in v) + "]"
    raise TypeError(f"cannot serialize {type(v)!r}")


def _json_line(pairs) -> str:
    return "{" + ",".join(f'{json.dumps(k)}:{_json_value(v)}' for k, v in pairs) + "}"


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v))
    return str(v)


# ---------------------------------------------------------------------------
# config parsing


def _load_json(path: Path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc


def _check_keys(obj: dict, where: str, required: set[str], optional: set[str] = frozenset()):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    keys = set(obj)
    missing = required - keys
    if missing:
        raise ConfigError(f"{where}: missing keys {sorted(missing)}")
    unknown = keys - required - optional
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def _number(obj, where) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ConfigError(f"{where} must be a number")
    return float(obj)


def _check_schema_version(obj: dict, where: str):
    version = obj.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            f"{where}: schema_version must be {SCHEMA_VERSION}, got {version!r}"
        )


def build_operator(obj: dict, dim: int, where: str) -> operators.OperatorSpec:
    """Construct a zoo operator from its JSON description."""
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError(f"{where}: operator needs a 'kind' field")
    kind = obj["kind"]
    try:
        if kind == "affine":
            _check_keys(obj, where, {"kind", "matrix"}, {"offset"})
            op = operators.affine(obj["matrix"], obj.get("offset"))
        elif kind == "scaled_identity":
            _check_keys(obj, where, {"kind", "scale"}, {"offset"})
            op = operators.scaled_identity(
                _number(obj["scale"], f"{where}.scale"), dim, obj.get("offset")
            )
        elif kind == "rotation2d":
            _check_keys(obj, where, {"kind"}, {"angle", "angle_deg"})
            op = operators.rotation2d(_angle(obj, where))
        elif kind == "scaled_identity_plus_rotation":
            _check_keys(obj, where, {"kind", "scale"}, {"angle", "angle_deg"})
            op = operators.scaled_identity_plus_rotation(
                _number(obj["scale"], f"{where}.scale"), _angle(obj, where)
            )
        elif kind == "normal_cone_box":
            _check_keys(obj, where, {"kind", "lower", "upper"})
            op = operators.normal_cone_box(obj["lower"], obj["upper"])
        elif kind == "normal_cone_ball":
            _check_keys(obj, where, {"kind", "center", "radius"})
            op = operators.normal_cone_ball(
                obj["center"], _number(obj["radius"], f"{where}.radius")
            )
        elif kind == "sum_of_two":
            _check_keys(obj, where, {"kind", "first", "second"})
            op = operators.sum_of_two(
                build_operator(obj["first"], dim, f"{where}.first"),
                build_operator(obj["second"], dim, f"{where}.second"),
            )
        else:
            raise ConfigError(f"{where}: unknown operator kind {kind!r}")
    except AdrSplitError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    if op.dim != dim:
        raise ConfigError(
            f"{where}: operator has dimension {op.dim}, problem declares {dim}"
        )
    return op


def _angle(obj: dict, where: str) -> float:
    has_rad = "angle" in obj
    has_deg = "angle_deg" in obj
    if has_rad == has_deg:
        raise ConfigError(f"{where}: provide exactly one of 'angle' or 'angle_deg'")
    if has_rad:
        return _number(obj["angle"], f"{where}.angle")
    return math.radians(_number(obj["angle_deg"], f"{where}.angle_deg"))


@dataclass
class ExperimentConfig:
    dim: int
    op_a: operators.OperatorSpec
    op_b: operators.OperatorSpec
    params: adr.ADRParams
    kappa_auto: bool
    x0_mode: str  # zeros | random
    x0_seed: int
    x0_scale: float
    max_iters: int
    step_tol: float
    trace_path: str
    summary_path: str
    dim_cap: int


def parse_experiment(obj: dict, where: str = "config") -> ExperimentConfig:
    _check_keys(obj, where, {"schema_version", "problem", "params"}, {"run", "outputs"})
    _check_schema_version(obj, where)

    prob = obj["problem"]
    _check_keys(prob, f"{where}.problem", {"dim", "operator_a", "operator_b"})
    dim = prob["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise ConfigError(f"{where}.problem.dim must be a positive integer")
    op_a = build_operator(prob["operator_a"], dim, f"{where}.problem.operator_a")
    op_b = build_operator(prob["operator_b"], dim, f"{where}.problem.operator_b")

    par = obj["params"]
    _check_keys(
        par,
        f"{where}.params",
        {"gamma", "delta", "alpha", "beta", "kappa", "regime"},
        {"shadow_mode"},
    )
    regime = par["regime"]
    if regime not in adr.REGIMES:
        raise ConfigError(f"{where}.params.regime must be one of {adr.REGIMES}")
    kappa = par["kappa"]
    kappa_auto = kappa == "auto"
    if not kappa_auto:
        kappa = _number(kappa, f"{where}.params.kappa")
    shadow_mode = par.get("shadow_mode", False)
    if not isinstance(shadow_mode, bool):
        raise ConfigError(f"{where}.params.shadow_mode must be a boolean")
    params = adr.ADRParams.create(
        _number(par["gamma"], "gamma"),
        _number(par["delta"], "delta"),
        _number(par["alpha"], "alpha"),
        _number(par["beta"], "beta"),
        regime,
        kappa=None if kappa_auto else kappa,
        shadow_mode=shadow_mode,
    )

    runsec = obj.get("run", {})
    _check_keys(runsec, f"{where}.run", set(), {"x0", "max_iters", "step_tol"})
    x0 = runsec.get("x0", "zeros")
    x0_mode, x0_seed, x0_scale = "zeros", 0, 1.0
    if x0 == "zeros":
        pass
    elif isinstance(x0, dict):
        _check_keys(x0, f"{where}.run.x0", {"random"})
        rnd = x0["random"]
        _check_keys(rnd, f"{where}.run.x0.random", {"seed"}, {"scale"})
        if not isinstance(rnd["seed"], int):
            raise ConfigError(f"{where}.run.x0.random.seed must be an integer")
        x0_mode, x0_seed = "random", rnd["seed"]
        x0_scale = _number(rnd.get("scale", 1.0), f"{where}.run.x0.random.scale")
    else:
        raise ConfigError(f"{where}.run.x0 must be 'zeros' or a random spec")
    max_iters = runsec.get("max_iters", adr.DEFAULT_MAX_ITERS)
    if not isinstance(max_iters, int) or max_iters < 1:
        raise ConfigError(f"{where}.run.max_iters must be a positive integer")
    step_tol = _number(runsec.get("step_tol", adr.DEFAULT_STEP_TOL), "step_tol")

    outsec = obj.get("outputs", {})
    _check_keys(outsec, f"{where}.outputs", set(), {"trace", "summary", "dim_cap"})
    dim_cap = outsec.get("dim_cap", adr.DEFAULT_DIM_CAP)
    if not isinstance(dim_cap, int) or dim_cap < 0:
        raise ConfigError(f"{where}.outputs.dim_cap must be a nonnegative integer")

    return ExperimentConfig(
        dim=dim,
        op_a=op_a,
        op_b=op_b,
        params=params,
        kappa_auto=kappa_auto,
        x0_mode=x0_mode,
        x0_seed=x0_seed,
        x0_scale=x0_scale,
        max_iters=max_iters,
        step_tol=step_tol,
        trace_path=outsec.get("trace", "trace.jsonl"),
        summary_path=outsec.get("summary", "summary.csv"),
        dim_cap=dim_cap,
    )


# ---------------------------------------------------------------------------
# command implementations


def _emit(quiet: bool, *lines: str):
    if not quiet:
        for line in lines:
            print(line)


def _out_path(out_dir: str | None, rel: str) -> Path:
    base = Path(out_dir) if out_dir else Path(".")
    base.mkdir(parents=True, exist_ok=True)
    path = base / rel
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _x0_vector(cfg: ExperimentConfig, seed_override: int | None) -> np.ndarray:
    if cfg.x0_mode == "zeros":
        return np.zeros(cfg.dim)
    seed = cfg.x0_seed if seed_override is None else seed_override
    rng = np.random.default_rng(seed)
    return cfg.x0_scale * rng.standard_normal(cfg.dim)


def _trace_lines(trace: adr.IterationTrace) -> list[str]:
    lines = []
    for rec in trace.records:
        pairs = [
            ("k", rec.k),
            ("step_residual", rec.step_residual),
            ("split_gap", rec.split_gap),
            ("identity_residual", rec.identity_residual),
            ("shadow_inclusion_residual", rec.shadow_inclusion_residual),
        ]
        if rec.x is not None:
            pairs.append(("x", rec.x))
            pairs.append(("shadow", rec.shadow))
        lines.append(_json_line(pairs))
    return lines


def _final_inclusion(trace: adr.IterationTrace) -> float | None:
    for rec in reversed(trace.records):
        if rec.shadow_inclusion_residual is not None:
            return rec.shadow_inclusion_residual
    return None


def _run_once(cfg: ExperimentConfig, seed_override: int | None):
    h1 = resolvents.ResolventHandle(cfg.op_a, cfg.params.gamma)
    h2 = resolvents.ResolventHandle(cfg.op_b, cfg.params.delta)
    x0 = _x0_vector(cfg, seed_override)
    return adr.run(
        cfg.params,
        h1,
        h2,
        x0,
        max_iters=cfg.max_iters,
        step_tol=cfg.step_tol,
        dim_cap=cfg.dim_cap,
    )


def cmd_validate(args) -> int:
    cfg = parse_experiment(_load_json(Path(args.config)))
    report = adr.validate(cfg.params)
    _emit(args.quiet, str(report))
    if math.isfinite(cfg.params.kappa_bar):
        _emit(
            args.quiet,
            f"kappa_bar = {cfg.params.kappa_bar!r}, kappa = {cfg.params.kappa!r}"
            + (" (auto)" if cfg.kappa_auto else ""),
        )
    if args.out:
        payload = {
            "regime": report.regime,
            "passed": report.passed,
            "kappa": cfg.params.kappa,
            "kappa_bar": cfg.params.kappa_bar,
            "lambda": cfg.params.lam,
            "mu": cfg.params.mu,
            "conditions": [
                {
                    "name": c.name,
                    "detail": c.detail,
                    "lhs": c.lhs,
                    "rhs": c.rhs,
                    "slack": c.slack,
                    "passed": c.passed,
                }
                for c in report.conditions
            ],
        }
        with open(_out_path(args.out, "validation.json"), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK if report.passed else EXIT_FAILURE


def _append_summary(path: Path, trace: adr.IterationTrace):
    fresh = not path.exists()
    with open(path, "a", encoding="utf-8", newline="") as fh:
        if fresh:
            fh.write(SUMMARY_HEADER + "\n")
        row = [
            trace.status,
            trace.iterations,
            trace.records[-1].step_residual if trace.records else math.nan,
            _final_inclusion(trace),
        ]
        fh.write(",".join(_csv_cell(v) for v in row) + "\n")


def cmd_run(args) -> int:
    cfg = parse_experiment(_load_json(Path(args.config)))
    report = adr.validate(cfg.params)
    if not report.passed:
        _emit(args.quiet, str(report))
        print(
            "validation failed: " + ", ".join(report.failed), file=sys.stderr
        )
        return EXIT_FAILURE
    trace = _run_once(cfg, args.seed)
    trace_path = _out_path(args.out, cfg.trace_path)
    with open(trace_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(_trace_lines(trace)))
        fh.write("\n")
    _append_summary(_out_path(args.out, cfg.summary_path), trace)
    final_step = trace.records[-1].step_residual if trace.records else math.nan
    _emit(
        args.quiet,
        f"status={trace.status} iterations={trace.iterations} "
        f"final_step_residual={final_step:.3e} "
        f"final_shadow_inclusion_residual={_final_inclusion(trace)} "
        f"trace={trace_path}",
    )
    return EXIT_FAILURE if trace.status == "diverged" else EXIT_OK


def parse_sweep(obj: dict):
    _check_keys(
        obj,
        "sweep",
        {"schema_version", "base", "grid"},
        {"seed_policy", "cell_cap"},
    )
    _check_schema_version(obj, "sweep")
    base = parse_experiment(obj["base"], "sweep.base")
    grid = obj["grid"]
    _check_keys(grid, "sweep.grid", set(), {"gamma", "delta", "kappa"})

    def axis(name) -> list:
        values = grid.get(name)
        if values is None:
            return [None]
        if not isinstance(values, list) or not values:
            raise ConfigError(f"sweep.grid.{name} must be a nonempty list")
        return [_number(v, f"sweep.grid.{name}") for v in values]

    gammas = axis("gamma")
    deltas = axis("delta")
    kappa_spec = grid.get("kappa")
    kappa_fractions = None
    if isinstance(kappa_spec, dict):
        _check_keys(kappa_spec, "sweep.grid.kappa", {"fractions_of_bound"})
        kappa_fractions = [
            _number(v, "fractions_of_bound")
            for v in kappa_spec["fractions_of_bound"]
        ]
        if not kappa_fractions:
            raise ConfigError("sweep.grid.kappa.fractions_of_bound is empty")
        kappas = kappa_fractions
    elif kappa_spec is None:
        kappas = [None]
    else:
        kappas = axis("kappa")

    policy = obj.get("seed_policy", {})
    _check_keys(policy, "sweep.seed_policy", set(), {"base_seed"})
    base_seed = policy.get("base_seed", 0)
    if not isinstance(base_seed, int):
        raise ConfigError("sweep.seed_policy.base_seed must be an integer")

    cell_cap = obj.get("cell_cap", 10_000)
    total = len(gammas) * len(deltas) * len(kappas)
    if total > cell_cap:
        raise ConfigError(f"sweep has {total} cells, cap is {cell_cap}")
    return base, gammas, deltas, kappas, kappa_fractions is not None, base_seed


def cmd_sweep(args) -> int:
    base, gammas, deltas, kappas, kappa_is_fraction, base_seed = parse_sweep(
        _load_json(Path(args.config))
    )
    if args.seed is not None:
        base_seed = args.seed
    rows = []
    for index, (g, d, kspec) in enumerate(
        itertools.product(gammas, deltas, kappas)
    ):
        gamma = base.params.gamma if g is None else g
        delta = base.params.delta if d is None else d
        seed = base_seed ^ index
        params = adr.ADRParams.create(
            gamma,
            delta,
            base.params.alpha,
            base.params.beta,
            base.params.regime,
            kappa=None,
            shadow_mode=base.params.shadow_mode,
        )
        if kspec is None:
            kappa = base.params.kappa if not base.kappa_auto else params.kappa
        elif kappa_is_fraction:
            kappa = kspec * params.kappa_bar
        else:
            kappa = kspec
        params = params.with_kappa(kappa)
        report = adr.validate(params)
        if not report.passed:
            rows.append(
                [index, gamma, delta, kappa, seed, "skipped", None, None, None,
                 ";".join(report.failed)]
            )
            continue
        cell_cfg = ExperimentConfig(
            dim=base.dim,
            op_a=base.op_a,
            op_b=base.op_b,
            params=params,
            kappa_auto=False,
            x0_mode=base.x0_mode,
            x0_seed=seed,
            x0_scale=base.x0_scale,
            max_iters=base.max_iters,
            step_tol=base.step_tol,
            trace_path=f"cell_{index:05d}.jsonl",
            summary_path=base.summary_path,
            dim_cap=base.dim_cap,
        )
        trace = _run_once(cell_cfg, None)
        with open(
            _out_path(args.out, cell_cfg.trace_path), "w", encoding="utf-8", newline=""
        ) as fh:
            fh.write("\n".join(_trace_lines(trace)))
            fh.write("\n")
        rows.append(
            [
                index,
                gamma,
                delta,
                kappa,
                seed,
                trace.status,
                trace.iterations,
                trace.records[-1].step_residual if trace.records else None,
                _final_inclusion(trace),
                "",
            ]
        )
    agg = _out_path(args.out, "sweep.csv")
    with open(agg, "w", encoding="utf-8", newline="") as fh:
        fh.write(SWEEP_HEADER + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(v) for v in row) + "\n")
    ran = sum(1 for r in rows if r[5] != "skipped")
    _emit(args.quiet, f"{len(rows)} cells ({ran} ran), aggregate in {agg}")
    return EXIT_OK


def parse_certify(obj: dict):
    _check_keys(obj, "certify config", {"schema_version", "dim", "operator", "certify"})
    _check_schema_version(obj, "certify config")
    dim = obj["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise ConfigError("dim must be a positive integer")
    op = build_operator(obj["operator"], dim, "operator")
    cert = obj["certify"]
    _check_keys(
        cert,
        "certify",
        {"target", "check"},
        {"constant", "gamma", "samples", "seed", "radius"},
    )
    target = cert["target"]
    check = cert["check"]
    if target == "operator":
        if check not in ("monotone", "comonotone"):
            raise ConfigError("operator targets support monotone/comonotone checks")
    elif target == "resolvent":
        if check not in ("cocoercive", "conically_averaged"):
            raise ConfigError(
                "resolvent targets support cocoercive/conically_averaged checks"
            )
    else:
        raise ConfigError("certify.target must be 'operator' or 'resolvent'")
    samples = cert.get("samples", 1000)
    if not isinstance(samples, int) or samples < 1:
        raise ConfigError("certify.samples must be a positive integer")
    seed = cert.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("certify.seed must be an integer")
    radius = _number(cert.get("radius", operators.DEFAULT_RADIUS), "certify.radius")
    gamma = cert.get("gamma")
    if target == "resolvent":
        if gamma is None:
            raise ConfigError("resolvent targets need certify.gamma")
        gamma = _number(gamma, "certify.gamma")
    constant = cert.get("constant", "auto")
    if constant != "auto":
        constant = _number(constant, "certify.constant")
    return op, target, check, constant, gamma, samples, seed, radius


def cmd_certify(args) -> int:
    op, target, check, constant, gamma, samples, seed, radius = parse_certify(
        _load_json(Path(args.config))
    )
    if args.seed is not None:
        seed = args.seed
    if target == "operator":
        if constant == "auto":
            claim = op.claim(check)
            if claim is None:
                raise ConfigError(f"operator carries no {check} claim to use as 'auto'")
            constant = claim.alpha
        certifier = (
            operators.certify_monotone
            if check == "monotone"
            else operators.certify_comonotone
        )
        cert = certifier(op, constant, samples=samples, seed=seed, radius=radius)
    else:
        handle = resolvents.ResolventHandle(op, gamma)
        flavor = "monotone" if check == "cocoercive" else "comonotone"
        if constant == "auto":
            claim = op.claim(flavor)
            if claim is None:
                raise ConfigError(
                    f"operator carries no {flavor} claim to derive the constant"
                )
            constant = resolvents.expected_constant(flavor, gamma, claim.alpha)
        certifier = (
            operators.certify_cocoercive
            if check == "cocoercive"
            else operators.certify_conically_averaged
        )
        cert = certifier(
            handle.map, constant, samples=samples, seed=seed, dim=op.dim, radius=radius
        )
    _emit(
        args.quiet,
        f"{check} check at constant {constant!r}: {cert.verdict} "
        f"(worst violation {cert.worst_violation:.3e} over {cert.sample_count} samples)",
    )
    if args.out:
        payload = {
            "flavor": cert.flavor,
            "constant": cert.alpha,
            "sample_count": cert.sample_count,
            "worst_violation": cert.worst_violation,
            "tolerance": cert.tolerance,
            "verdict": cert.verdict,
        }
        with open(_out_path(args.out, "certificate.json"), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK if cert.passed else EXIT_FAILURE


def _load_trace_xs(path: Path) -> np.ndarray:
    xs = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if "x" not in record:
                    raise UsageError(
                        "trace records carry no iterate vectors; rerun with a "
                        "dim_cap at least the problem dimension"
                    )
                xs.append(record["x"])
    except FileNotFoundError as exc:
        raise UsageError(f"trace file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid trace line in {path}: {exc}") from exc
    if not xs:
        raise UsageError(f"trace {path} is empty")
    return np.asarray(xs, dtype=np.float64)


def _load_limits(path: Path, dim: int):
    obj = _load_json(path)
    _check_keys(obj, "limits", {"x_star"}, {"y_star"})
    x_star = np.asarray(obj["x_star"], dtype=np.float64)
    if x_star.shape != (dim,):
        raise ConfigError(f"limits.x_star must have dimension {dim}")
    y_star = obj.get("y_star")
    if y_star is not None:
        y_star = np.asarray(y_star, dtype=np.float64)
        if y_star.shape != (dim,):
            raise ConfigError(f"limits.y_star must have dimension {dim}")
    return x_star, y_star


def cmd_demi_check(args) -> int:
    cfg = parse_experiment(_load_json(Path(args.config)))
    mode = args.mode or cfg.params.regime
    if mode not in adr.REGIMES:
        raise ConfigError(f"mode must be one of {adr.REGIMES}")
    xs = _load_trace_xs(Path(args.trace))
    if xs.shape[1] != cfg.dim:
        raise UsageError(
            f"trace dimension {xs.shape[1]} does not match problem dim {cfg.dim}"
        )
    x_star, y_star = _load_limits(Path(args.limits), cfg.dim)
    h1 = resolvents.ResolventHandle(cfg.op_a, cfg.params.gamma)
    h2 = resolvents.ResolventHandle(cfg.op_b, cfg.params.delta)
    premises = adr.shadow_premises(xs, cfg.params, h1, h2, x_star, y_star)
    if mode == "monotone":
        diagnostics = demiclosedness.check_cocoercive_premises(
            premises.window,
            premises.maps,
            premises.rho,
            premises.tau,
            mode="balanced",
        )
    else:
        diagnostics = demiclosedness.check_averaged_premises(
            premises.window,
            premises.maps,
            premises.thetas,
            variant="two_balanced",
            rho=premises.rho,
        )
    limits, y = premises.window.require_limits()
    conclusion = demiclosedness.verify_conclusion(
        premises.maps, limits, y, args.tol
    )
    for key in sorted(diagnostics.residuals):
        trend = diagnostics.trends[key]
        _emit(
            args.quiet,
            f"condition ({key}) {diagnostics.descriptions[key]}: "
            f"{'pass' if trend.passed else 'FAIL'} "
            f"(final-quarter mean {trend.final_quarter_mean:.3e}, "
            f"threshold {trend.threshold:.3e}, log-slope {trend.log_slope:.3f})",
        )
    _emit(
        args.quiet,
        f"conclusion at tol {args.tol:g}: "
        f"{'pass' if conclusion.passed else 'FAIL'} "
        f"(max residual {float(np.max(conclusion.residuals)):.3e})",
    )
    if args.out:
        path = _out_path(args.out, "demi_diagnostics.jsonl")
        keys = sorted(diagnostics.residuals)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for k in range(premises.window.length):
                pairs = [("k", k)] + [
                    (key, float(diagnostics.residuals[key][k])) for key in keys
                ]
                fh.write(_json_line(pairs) + "\n")
    ok = diagnostics.passed and conclusion.passed
    return EXIT_OK if ok else EXIT_FAILURE


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adrsplit",
        description="Adaptive Douglas-Rachford splitting toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="path to the JSON config")
        sp.add_argument("--out", default=None, help="directory for output artifacts")
        sp.add_argument("--seed", type=int, default=None, help="override config seed")
        sp.add_argument("--quiet", action="store_true", help="suppress stdout")

    common(sub.add_parser("validate", help="check parameter admissibility"))
    common(sub.add_parser("run", help="run the solver once"))
    common(sub.add_parser("sweep", help="run a parameter grid"))
    common(sub.add_parser("certify", help="sample-check a claimed constant"))
    demi = sub.add_parser("demi-check", help="premise diagnostics on a trace")
    common(demi)
    demi.add_argument("--trace", required=True, help="JSONL trace with iterates")
    demi.add_argument("--limits", required=True, help="JSON file with claimed limits")
    demi.add_argument(
        "--mode", choices=list(adr.REGIMES), default=None, help="premise bundle"
    )
    demi.add_argument("--tol", type=float, default=1e-8, help="conclusion tolerance")
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "certify": cmd_certify,
    "demi-check": cmd_demi_check,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AdrSplitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
