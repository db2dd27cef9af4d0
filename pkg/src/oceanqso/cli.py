"""Command-line front end.

    oceanqso validate       -a A -b B -c C -d D
    oceanqso fixed-points   -a A -b B -c C -d D
    oceanqso iterate        -a A -b B -c C -d D --x0 X --y0 Y --n N
    oceanqso phase-portrait -a A -b B -c C -d D --grid G --n N [--stride S]
    oceanqso verify         -a A -b B -c C -d D --grid G [--tol T] [--max-iter M]

Parameters may also come from ``--config FILE`` holding ``key=value`` lines
with the flag names as keys; flags given on the command line win.  Exit codes:
0 success, 1 parameters outside the non-negative tensor box (validate) or failed verification (verify),
2 malformed input.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np

from . import analysis as an
from . import dynamics as dyn
from .serialization import dumps, fixed_point_to_dict, fmt17, trajectory_csv
from .simplex_core import (
    InvalidParameters,
    ModelParameters,
    NotOnSimplex,
    point_from_reduced,
    validate_parameters,
)

COMMANDS = ("validate", "fixed-points", "iterate", "phase-portrait", "verify")
CONFIG_KEYS = (
    "a", "b", "c", "d", "x0", "y0", "n", "tol", "conv-tol", "max-iter",
    "grid", "stride", "format", "out",
)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    params: ModelParameters
    x0: Optional[float] = None
    y0: Optional[float] = None
    n: int = 100
    tol: Optional[float] = None
    conv_tol: float = dyn.DEFAULT_TOL
    max_iter: int = dyn.DEFAULT_MAX_ITER
    grid: Optional[int] = None
    stride: Optional[int] = None
    fmt: Optional[str] = None
    out: Optional[str] = None


def read_config_file(path: str) -> dict[str, str]:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("_", "-")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _number(key: str, text: str) -> float:
    try:
        value = float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{key}: cannot parse {text!r}") from exc
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite")
    return value


def _count(key: str, text: str, minimum: int) -> int:
    try:
        value = int(str(text).strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from exc
    if value < minimum:
        raise ConfigError(f"{key}: must be >= {minimum}")
    return value


def build_config(ns: argparse.Namespace) -> RunConfig:
    merged: dict[str, str] = read_config_file(ns.config) if ns.config else {}
    for key in CONFIG_KEYS:
        value = getattr(ns, key.replace("-", "_"), None)
        if value is not None:
            merged[key] = value
    missing = [k for k in "abcd" if k not in merged]
    if missing:
        raise ConfigError(f"missing parameter(s): {', '.join(missing)}")
    params = ModelParameters(*(_number(k, merged[k]) for k in "abcd"))
    cfg = RunConfig(command=ns.command, params=params)
    if "x0" in merged:
        cfg.x0 = _number("x0", merged["x0"])
    if "y0" in merged:
        cfg.y0 = _number("y0", merged["y0"])
    if "n" in merged:
        cfg.n = _count("n", merged["n"], 0)
    if "tol" in merged:
        cfg.tol = _number("tol", merged["tol"])
        if cfg.tol <= 0:
            raise ConfigError("tol: must be positive")
    if "conv-tol" in merged:
        cfg.conv_tol = _number("conv-tol", merged["conv-tol"])
        if cfg.conv_tol <= 0:
            raise ConfigError("conv-tol: must be positive")
    if "max-iter" in merged:
        cfg.max_iter = _count("max-iter", merged["max-iter"], 0)
    if "grid" in merged:
        cfg.grid = _count("grid", merged["grid"], 2)
    if "stride" in merged:
        cfg.stride = _count("stride", merged["stride"], 1)
    if "format" in merged:
        if merged["format"] not in ("json", "csv"):
            raise ConfigError("format: must be json or csv")
        cfg.fmt = merged["format"]
    if "out" in merged:
        cfg.out = merged["out"]
    return cfg


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _require_valid(cfg: RunConfig) -> None:
    # iteration only needs the simplex to be invariant, not a non-negative tensor
    report = validate_parameters(cfg.params)
    if not report.preserves_simplex:
        raise ConfigError("invalid parameters: " + "; ".join(report.violations))


def _json_only(cfg: RunConfig) -> None:
    if cfg.fmt not in (None, "json"):
        raise ConfigError(f"{cfg.command} only writes json")


def cmd_validate(cfg: RunConfig) -> int:
    _json_only(cfg)
    report = validate_parameters(cfg.params)
    payload = {
        "params": cfg.params.to_dict(),
        "valid": report.valid,
        "violations": list(report.violations),
        "preserves_simplex": report.preserves_simplex,
        "regime": str(an.regime(cfg.params)) if report.preserves_simplex else None,
    }
    _emit(cfg, dumps(payload))
    return 0 if report.valid else 1


def fixed_points_payload(params: ModelParameters) -> dict:
    return {
        "params": params.to_dict(),
        "regime": str(an.regime(params)),
        "fixed_points": [fixed_point_to_dict(r) for r in an.enumerate_fixed_points(params)],
    }


def cmd_fixed_points(cfg: RunConfig) -> int:
    _json_only(cfg)
    _require_valid(cfg)
    _emit(cfg, dumps(fixed_points_payload(cfg.params)))
    return 0


def _initial_point(cfg: RunConfig):
    if cfg.x0 is None or cfg.y0 is None:
        raise ConfigError("--x0 and --y0 are required")
    try:
        return point_from_reduced(cfg.x0, cfg.y0)
    except NotOnSimplex as exc:
        raise ConfigError(str(exc)) from exc


def cmd_iterate(cfg: RunConfig) -> int:
    _require_valid(cfg)
    p0 = _initial_point(cfg)
    traj = dyn.iterate(cfg.params, p0, cfg.n, cfg.tol or dyn.DEFAULT_TOL)
    if (cfg.fmt or "csv") == "csv":
        _emit(cfg, trajectory_csv(traj.states))
        return 0
    payload = {
        "params": cfg.params.to_dict(),
        "initial": list(p0.as_tuple()),
        "n": cfg.n,
        "states": traj.states.tolist(),
        "converged": traj.converged,
        "iterations_to_converge": traj.iterations_to_converge,
        "limit": list(traj.limit.as_tuple()) if traj.limit else None,
    }
    _emit(cfg, dumps(payload))
    return 0


def default_stride(n: int) -> int:
    return 1 if n <= 200 else -(-n // 200)


def phase_portrait_payload(
    params: ModelParameters,
    grid: int,
    n: int,
    stride: int,
    conv_tol: float = dyn.DEFAULT_TOL,
    max_iter: int = dyn.DEFAULT_MAX_ITER,
) -> dict:
    """Subsampled orbits from a barycentric grid, each tagged with its basin."""
    starts = dyn.barycentric_grid(grid)
    pts = np.array([p.as_tuple() for p in starts])
    orbits = dyn.iterate_batch(params, pts, n)
    limits = dyn.converge_batch(params, pts, conv_tol, max_iter)
    fps = an.enumerate_fixed_points(params)
    keep = list(range(0, n + 1, stride))
    if keep[-1] != n:
        keep.append(n)
    trajectories = []
    for i, p in enumerate(starts):
        res = limits.result(i)
        basin = dyn.basin_label(fps, res.point) if res.converged else "not_converged"
        trajectories.append(
            {
                "initial": list(p.as_tuple()),
                "basin": basin,
                "limit": list(res.point.as_tuple()),
                "steps": keep,
                "points": orbits[keep, i, :].tolist(),
            }
        )
    return {
        "params": params.to_dict(),
        "regime": str(an.regime(params)),
        "grid": grid,
        "n": n,
        "stride": stride,
        "fixed_points": [fixed_point_to_dict(r) for r in fps],
        "trajectories": trajectories,
    }


def cmd_phase_portrait(cfg: RunConfig) -> int:
    _require_valid(cfg)
    grid = cfg.grid or 10
    stride = cfg.stride or default_stride(cfg.n)
    payload = phase_portrait_payload(cfg.params, grid, cfg.n, stride, cfg.conv_tol, cfg.max_iter)
    if (cfg.fmt or "json") == "json":
        _emit(cfg, dumps(payload))
        return 0
    lines = ["traj,basin,n,x,y,z"]
    for t, tr in enumerate(payload["trajectories"]):
        for n, (x, y, z) in zip(tr["steps"], tr["points"]):
            lines.append(f"{t},{tr['basin']},{n},{fmt17(x)},{fmt17(y)},{fmt17(z)}")
    _emit(cfg, "\n".join(lines) + "\n")
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    _json_only(cfg)
    _require_valid(cfg)
    report = dyn.regularity_sweep(
        cfg.params,
        cfg.grid or 30,
        tol=cfg.tol or 1e-6,
        max_iter=cfg.max_iter,
        conv_tol=cfg.conv_tol,
    )
    _emit(cfg, dumps(report.to_dict()))
    s = report.to_dict()["summary"]
    print(
        f"{report.regime}: {s['passed']}/{s['points']} passed, "
        f"{s['not_converged']} not converged, max iterations {s['max_iterations']}",
        file=sys.stderr,
    )
    return 0 if report.all_passed else 1


HELP = {
    "validate": "check parameters and report the regime",
    "fixed-points": "list fixed points with eigenvalues and stability",
    "iterate": "print one trajectory",
    "phase-portrait": "trajectories from a grid of initial points",
    "verify": "compare predicted and simulated limits on a grid",
}

HANDLERS = {
    "validate": cmd_validate,
    "fixed-points": cmd_fixed_points,
    "iterate": cmd_iterate,
    "phase-portrait": cmd_phase_portrait,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oceanqso",
        description="Discrete-time NPZ ecosystem operator on the 2-simplex.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    for flag in "abcd":
        # values stay strings here so that they are parsed exactly later
        common.add_argument(
            f"-{flag}", dest=flag, metavar=flag.upper(), help=f"rate {flag} (decimal or p/q)"
        )
    common.add_argument("--config", metavar="PATH", help="key=value file; flags override it")
    common.add_argument("--format", choices=("json", "csv"), help="output format")
    common.add_argument("--out", metavar="PATH", help="write to PATH instead of stdout")
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=HELP[name])
        if name in ("iterate",):
            p.add_argument("--x0", help="initial zooplankton share")
            p.add_argument("--y0", help="initial phytoplankton share")
        if name in ("iterate", "phase-portrait"):
            p.add_argument("--n", help="number of steps (default 100)")
        if name in ("phase-portrait",):
            p.add_argument("--stride", help="keep every STRIDE-th state (default from n)")
        if name == "iterate":
            p.add_argument("--tol", help="convergence tolerance (default 1e-9)")
        if name == "verify":
            p.add_argument("--tol", help="prediction tolerance (default 1e-6)")
        if name in ("phase-portrait", "verify"):
            default_grid = 10 if name == "phase-portrait" else 30
            p.add_argument("--grid", help=f"barycentric grid resolution (default {default_grid})")
            p.add_argument("--max-iter", dest="max_iter", help="iteration cap (default 10^6)")
            p.add_argument("--conv-tol", dest="conv_tol", help="convergence tolerance (default 1e-9)")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = build_config(ns)
        return HANDLERS[cfg.command](cfg)
    except (ConfigError, InvalidParameters, NotOnSimplex) as exc:
        print(f"oceanqso {ns.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
