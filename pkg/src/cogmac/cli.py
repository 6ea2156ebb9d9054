"""Command-line front end: scenario ingestion and deterministic JSON/CSV output.

Commands: solve, region, sweep, validate.  Floats are always emitted with 12
significant digits and '\n' line endings so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time

import numpy as np

from . import __version__
from .channel import (
    ChannelInstance,
    PowerSplit,
    baseline_primary_rate,
    primary_rate,
)
from .oracle import grid_search, kkt_check
from .region import UnsupportedSizeError, region_boundary
from .solver import (
    SolverConfig,
    SolverResult,
    SolverStatus,
    default_lambda_step,
    solve_max_sum_rate,
    sweep_trajectory,
)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_CONVERGED = 2


class ScenarioError(ValueError):
    """Scenario file is malformed; message names the offending field."""


_CHANNEL_VECTOR_KEYS = ("h", "g", "p")
_CHANNEL_SCALAR_KEYS = ("h_p", "p_p", "sigma_p2", "sigma_c2")
_SOLVER_KEYS = {
    "lambda_step",
    "residual_tol",
    "max_outer_iters",
    "bisection_refine",
    "refine_tol",
}
_ALLOWED_KEYS = set(_CHANNEL_VECTOR_KEYS) | set(_CHANNEL_SCALAR_KEYS) | {
    "f",
    "name",
    "solver",
}


def _require_number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{field} must be a number, got {value!r}")
    return float(value)


def load_scenario(path: str) -> tuple[ChannelInstance, SolverConfig, str | None]:
    """Parse a scenario JSON file into (instance, solver config, name)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario file must contain a JSON object")
    unknown = sorted(set(doc) - _ALLOWED_KEYS)
    if unknown:
        raise ScenarioError(f"unknown field {unknown[0]!r}")

    vectors = {}
    for key in _CHANNEL_VECTOR_KEYS:
        if key not in doc:
            raise ScenarioError(f"missing field {key!r}")
        raw = doc[key]
        if not isinstance(raw, list) or not raw:
            raise ScenarioError(f"{key} must be a nonempty list of numbers")
        vectors[key] = [_require_number(v, f"{key}[{i}]") for i, v in enumerate(raw)]
    lengths = {key: len(vec) for key, vec in vectors.items()}
    if len(set(lengths.values())) != 1:
        raise ScenarioError(f"h, g, p must have equal lengths, got {lengths}")

    scalars = {}
    for key in _CHANNEL_SCALAR_KEYS:
        if key not in doc:
            raise ScenarioError(f"missing field {key!r}")
        scalars[key] = _require_number(doc[key], key)
    f_gain = _require_number(doc.get("f", 0.0), "f")

    # re-validate with field-level messages before the dataclass invariants run
    for key in _CHANNEL_VECTOR_KEYS:
        for i, v in enumerate(vectors[key]):
            if key == "p" and v <= 0:
                raise ScenarioError(f"p[{i}] must be strictly positive, got {v}")
            if key != "p" and v < 0:
                raise ScenarioError(f"{key}[{i}] must be nonnegative, got {v}")
    if scalars["h_p"] < 0:
        raise ScenarioError(f"h_p must be nonnegative, got {scalars['h_p']}")
    if scalars["p_p"] <= 0:
        raise ScenarioError(f"p_p must be strictly positive, got {scalars['p_p']}")
    for key in ("sigma_p2", "sigma_c2"):
        if scalars[key] <= 0:
            raise ScenarioError(f"{key} must be strictly positive, got {scalars[key]}")
    if f_gain < 0:
        raise ScenarioError(f"f must be nonnegative, got {f_gain}")

    try:
        ch = ChannelInstance(
            h=vectors["h"], g=vectors["g"], p=vectors["p"], f=f_gain, **scalars
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    solver_doc = doc.get("solver", {})
    if not isinstance(solver_doc, dict):
        raise ScenarioError("solver must be an object")
    unknown = sorted(set(solver_doc) - _SOLVER_KEYS)
    if unknown:
        raise ScenarioError(f"unknown field solver.{unknown[0]}")
    cfg_kwargs = {}
    for key, value in solver_doc.items():
        if key == "bisection_refine":
            if not isinstance(value, bool):
                raise ScenarioError(f"solver.{key} must be a boolean")
            cfg_kwargs[key] = value
        elif key == "max_outer_iters":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ScenarioError(f"solver.{key} must be an integer")
            cfg_kwargs[key] = value
        else:
            cfg_kwargs[key] = _require_number(value, f"solver.{key}")
    try:
        cfg = SolverConfig(**cfg_kwargs)
    except ValueError as exc:
        raise ScenarioError(f"solver: {exc}") from exc

    name = doc.get("name")
    if name is not None and not isinstance(name, str):
        raise ScenarioError("name must be a string")
    return ch, cfg, name


def scenario_echo(ch: ChannelInstance, name: str | None) -> dict:
    echo = {
        "h": list(ch.h),
        "g": list(ch.g),
        "p": list(ch.p),
        "h_p": ch.h_p,
        "p_p": ch.p_p,
        "sigma_p2": ch.sigma_p2,
        "sigma_c2": ch.sigma_c2,
        "f": ch.f,
    }
    if name is not None:
        echo["name"] = name
    return echo


def format_float(x: float) -> str:
    return format(float(x), ".12g")


def dump_json(obj, indent: int = 0) -> str:
    """JSON emitter with fixed 12-significant-digit float formatting."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {dump_json(v, indent + 1)}'
            for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(f"{pad}  {dump_json(v, indent + 1)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    return json.dumps(obj)


def _write_out(text: str, out_path: str | None) -> None:
    if out_path is None or out_path == "-":
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def solver_result_dict(ch: ChannelInstance, result: SolverResult) -> dict:
    return {
        "status": result.status.value,
        "gamma_star": list(result.gamma_star.gamma),
        "sum_rate_bits": result.sum_rate,
        "lambda_star": result.lambda_star,
        "residual_rel": result.residual,
        "outer_iterations": result.outer_iterations,
        "active_set_changes": result.active_set_changes,
        "baseline_primary_rate_bits": baseline_primary_rate(ch),
        "achieved_primary_rate_bits": primary_rate(ch, result.gamma_star),
    }


def cmd_solve(args) -> int:
    started = time.monotonic()
    ch, cfg, name = load_scenario(args.scenario)
    if args.lambda_step is not None:
        cfg = dataclasses.replace(cfg, lambda_step=args.lambda_step)
    if args.tol is not None:
        cfg = dataclasses.replace(cfg, residual_tol=args.tol)
    result = solve_max_sum_rate(ch, cfg)
    report = {
        "scenario": scenario_echo(ch, name),
        **solver_result_dict(ch, result),
        "artifact_version": __version__,
    }
    if args.oracle:
        if ch.num_users > 3:
            raise ScenarioError("oracle comparison supports at most 3 users")
        oracle = grid_search(ch, args.grid_step)
        report["oracle"] = {
            "best_gamma": list(oracle.best_gamma.gamma),
            "best_sum_rate_bits": oracle.best_sum_rate,
            "grid_step": oracle.grid_step,
            "points_evaluated": oracle.points_evaluated,
            "gap_bits": result.sum_rate - oracle.best_sum_rate,
        }
    _write_out(dump_json(report) + "\n", args.out)
    print(f"duration_s={time.monotonic() - started:.3f}", file=sys.stderr)
    if result.status is SolverStatus.MAX_ITERS_EXCEEDED:
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_region(args) -> int:
    ch, _cfg, _name = load_scenario(args.scenario)
    if ch.num_users != 2:
        print("region command requires exactly 2 users", file=sys.stderr)
        return EXIT_INPUT_ERROR
    boundary = region_boundary(ch, args.grid_step)
    lines = ["r1_bits,r2_bits"]
    lines.extend(
        f"{format_float(r1)},{format_float(r2)}" for r1, r2 in boundary.points
    )
    _write_out("\n".join(lines) + "\n", args.out)
    print(
        f"vertices={len(boundary.points)} samples={boundary.samples_used} "
        f"max_sum_rate_bits={format_float(boundary.max_sum_rate())}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    ch, cfg, _name = load_scenario(args.scenario)
    if args.lambda_max is not None:
        lambda_max = args.lambda_max
    else:
        result = solve_max_sum_rate(ch, cfg)
        if result.lambda_star > 0:
            lambda_max = 1.25 * result.lambda_star
        else:
            lambda_max = default_lambda_step(ch) * 1000.0
    rows = sweep_trajectory(ch, lambda_max, args.samples)
    k = ch.num_users
    header = ["lambda", "x"] + [f"gamma_{i + 1}" for i in range(k)] + [
        "phi",
        "saturated_users",
    ]
    lines = [",".join(header)]
    for row in rows:
        cells = [format_float(row.lam), format_float(row.x_value)]
        cells.extend(format_float(v) for v in row.gamma.gamma)
        cells.append(format_float(row.phi))
        cells.append("|".join(str(i + 1) for i in sorted(row.saturated)))
        lines.append(",".join(cells))
    _write_out("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    ch, cfg, name = load_scenario(args.scenario)
    if ch.num_users > 3:
        print("validate command supports at most 3 users", file=sys.stderr)
        return EXIT_INPUT_ERROR
    result = solve_max_sum_rate(ch, cfg)
    oracle = grid_search(ch, args.grid_step)
    report = kkt_check(ch, result, tol=args.tol)
    gap = result.sum_rate - oracle.best_sum_rate
    agreement_ok = abs(gap) <= args.agreement_tol and gap >= -args.agreement_tol
    converged = result.status is not SolverStatus.MAX_ITERS_EXCEEDED
    verdict = converged and agreement_ok and report.passed
    doc = {
        "scenario": scenario_echo(ch, name),
        "solver": solver_result_dict(ch, result),
        "oracle": {
            "best_gamma": list(oracle.best_gamma.gamma),
            "best_sum_rate_bits": oracle.best_sum_rate,
            "grid_step": oracle.grid_step,
            "points_evaluated": oracle.points_evaluated,
        },
        "sum_rate_gap_bits": gap,
        "agreement_tol_bits": args.agreement_tol,
        "kkt": {
            "stationarity_scaled": {
                str(k + 1): v for k, v in sorted(report.stationarity.items())
            },
            "interior_users": [k + 1 for k in report.interior_users],
            "saturated_users": [k + 1 for k in report.saturated_users],
            "feasibility_rel": report.feasibility_rel,
            "bounds_ok": report.bounds_ok,
            "stationarity_ok": report.stationarity_ok,
            "feasibility_ok": report.feasibility_ok,
            "passed": report.passed,
        },
        "verdict": "pass" if verdict else "fail",
        "artifact_version": __version__,
    }
    _write_out(dump_json(doc) + "\n", args.out)
    return EXIT_OK if verdict else EXIT_NOT_CONVERGED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogmac",
        description="Cognitive multiple-access channel: sum-rate optimal power "
        "splitting and capacity region computation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, grid_default=None):
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    p_solve = sub.add_parser("solve", help="maximum sum-rate power split")
    add_common(p_solve)
    p_solve.add_argument("--lambda-step", type=float, default=None)
    p_solve.add_argument("--tol", type=float, default=None, help="residual tolerance")
    p_solve.add_argument("--oracle", action="store_true", help="attach grid-search comparison")
    p_solve.add_argument("--grid-step", type=float, default=1e-3)
    p_solve.set_defaults(func=cmd_solve)

    p_region = sub.add_parser("region", help="two-user capacity region boundary CSV")
    add_common(p_region)
    p_region.add_argument("--grid-step", type=float, default=1e-2)
    p_region.set_defaults(func=cmd_region)

    p_sweep = sub.add_parser("sweep", help="multiplier trajectory CSV")
    add_common(p_sweep)
    p_sweep.add_argument("--lambda-max", type=float, default=None)
    p_sweep.add_argument("--samples", type=int, default=201)
    p_sweep.set_defaults(func=cmd_sweep)

    p_validate = sub.add_parser("validate", help="oracle + KKT verdict JSON")
    add_common(p_validate)
    p_validate.add_argument("--grid-step", type=float, default=1e-3)
    p_validate.add_argument("--tol", type=float, default=1e-6, help="KKT tolerance")
    p_validate.add_argument(
        "--agreement-tol", type=float, default=1e-3, help="sum-rate agreement, bits"
    )
    p_validate.add_argument("--seed", type=int, default=None, help="unused; reserved")
    p_validate.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, UnsupportedSizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
