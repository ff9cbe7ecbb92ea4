"""Command-line front end: lce, convexity, descend, verify and bench."""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
import time
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .core import InputError, SampleCloud, as_point, cloud_objective, evaluate, grid_points
from .descent import (
    SOLVERS,
    Stage1Config,
    Stage2Config,
    directional_descent,
    stage2_march,
    bound_check,
)
from .envelope import EnvelopeUnavailableError, convexity_set, default_tol, lce_value
from .hull_lp import SolverStalledError
from .oracles import (
    check_caratheodory,
    check_envelope_oracle,
    check_envelope_restriction,
    check_minimizer_preservation,
    check_monotone_segment,
    check_optimal_direction,
    check_subgradient_equivalence,
)
from .testfns import UnknownFunctionError, function_params, get_function

EXIT_OK, EXIT_WITNESS, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
PROPERTIES = ("direction", "monotone", "envelope", "caratheodory", "preservation",
              "restriction", "subgradient")

DEFAULTS: dict[str, Any] = {
    "fn": "w_piecewise",
    "seed": 0,
    "delta": 0.1,
    "alpha": 0.05,
    "solver": "compass-search",
    "budget": 2000,
    "window": 3,
    "grid": 50,
    "count": 1000,
}

BENCH_FUNCTIONS = (
    ("abs1d", {}, "0.8"),
    ("aniso_quadratic", {"kappa": 10.0}, "1,1"),
    ("norm_radial", {"n": 2}, "1,1"),
    ("sq_radial", {"n": 2}, "1,1"),
    ("w_piecewise", {}, "0.75"),
)


# --------------------------------------------------------------------------
# serialization


def fmt(x: float) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _encode(obj: Any, indent: int = 0) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
               for v in seq):
            return "[" + ", ".join(_encode(v) for v in seq) + "]"
        return "[\n" + ",\n".join(inner + _encode(v, indent + 1) for v in seq) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no infinities; they travel as strings
        return format(x, ".17g") if math.isfinite(x) else json.dumps(fmt(x))
    return json.dumps(str(obj))


def dumps(obj: Any) -> str:
    return _encode(obj) + "\n"


def _write(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _csv_text(header: list[str], rows: list[list[Any]], config: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# dirdescent {__version__}\n")
    buf.write("# config: " + json.dumps(config, sort_keys=True, default=str) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating, bool, np.bool_)) else v for v in row])
    return buf.getvalue()


# --------------------------------------------------------------------------
# config resolution


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in str(text).replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated numbers, got {text!r}") from None


def _read_config(path: str) -> dict[str, str]:
    p = Path(path)
    if not p.exists():
        raise InputError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    cp.read_string("[run]\n" + p.read_text(encoding="utf-8"))
    return {k.replace("-", "_"): v for k, v in cp["run"].items()}


def resolve(args: argparse.Namespace, parser: argparse.ArgumentParser) -> dict[str, Any]:
    """Merge built-in defaults, config-file values and flags (flags win)."""
    file_cfg = _read_config(args.config) if args.config else {}
    types = {a.dest: a.type for a in parser._actions if a.dest != "help"}
    cfg: dict[str, Any] = {}
    for dest, typ in types.items():
        if dest in ("config", "command"):
            continue
        val = getattr(args, dest, None)
        if val is None and dest in file_cfg:
            raw = file_cfg[dest]
            try:
                val = typ(raw) if typ else raw
            except (TypeError, ValueError):
                raise InputError(f"bad value for {dest} in config: {raw!r}") from None
        if val is None:
            val = DEFAULTS.get(dest)
        if val is not None:
            cfg[dest] = val
    unknown = set(file_cfg) - set(types)
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
    cfg["command"] = args.command
    return cfg


def _function(cfg: dict):
    """Registry entry (or None for a file cloud), objective, cloud and tags."""
    spec = cfg["fn"]
    if spec.startswith("file:"):
        cloud = SampleCloud.read_csv(spec[5:])
        return None, cloud_objective(cloud, name=spec), cloud, frozenset()
    accepted = function_params(spec)
    params = {}
    for key in ("n", "kappa", "R", "mesh", "breakpoints", "pieces", "radius"):
        if key in accepted and cfg.get(key) is not None:
            params[key] = cfg[key]
    if "c" in accepted and cfg.get("c") is not None:
        params["c"] = _floats(cfg["c"])
    if "seed" in accepted:
        params["seed"] = cfg.get("seed", 0)
    entry = get_function(spec, **params)
    return entry, entry.objective, entry.cloud(), entry.tags


# --------------------------------------------------------------------------
# subcommands


def _envelope_rows(cloud, obj, queries, tol):
    rows = []
    for q in queries:
        cert = lce_value(cloud, q)
        f = evaluate(obj, q)
        gap = f - cert.value if math.isfinite(cert.value) else math.nan
        in_af = bool(math.isfinite(f) and math.isfinite(cert.value) and gap <= tol)
        rows.append([fmt(c) for c in q] + [cert.value, gap, in_af])
    return rows


def cmd_lce(cfg: dict) -> int:
    entry, obj, cloud, _ = _function(cfg)
    tol = cfg.get("tol") or default_tol(cloud)
    if cfg.get("queries"):
        qs = np.array([_floats(q) for q in str(cfg["queries"]).split(";") if q.strip()])
    else:
        lo, hi = cloud.points.min(axis=0), cloud.points.max(axis=0)
        step = cfg.get("query_step") or (entry.mesh / 2 if entry else (hi - lo).max() / 20 or 1.0)
        qs = grid_points(lo, hi, step)
    qs = qs.reshape(-1, cloud.dim)
    header = [f"x{i + 1}" for i in range(cloud.dim)] + ["lce", "gap", "in_Af"]
    cfg = dict(cfg, tol=tol)
    _write(_csv_text(header, _envelope_rows(cloud, obj, qs, tol), cfg), cfg.get("out"))
    return EXIT_OK


def cmd_convexity(cfg: dict) -> int:
    _, _, cloud, _ = _function(cfg)
    mask = convexity_set(cloud, cfg.get("tol"))
    header = [f"x{i + 1}" for i in range(cloud.dim)] + ["lce", "gap", "in_Af"]
    rows = [[fmt(c) for c in p] + [e, g, bool(a)]
            for p, e, g, a in zip(cloud.points, mask.envelope, mask.gap, mask.in_af)]
    _write(_csv_text(header, rows, dict(cfg, tol=mask.tol)), cfg.get("out"))
    return EXIT_OK


def _descent_configs(cfg: dict, dim: int):
    if cfg.get("x0") is None:
        raise InputError("--x0 is required")
    x0 = as_point(_floats(cfg["x0"]), dim)
    s1 = Stage1Config(x0, float(cfg["delta"]), cfg["solver"], int(cfg["budget"]), int(cfg["seed"]))
    s2 = Stage2Config(float(cfg["alpha"]), cfg.get("max_steps"), int(cfg["window"]))
    return x0, s1, s2


def cmd_descend(cfg: dict) -> int:
    entry, obj, _, tags = _function(cfg)
    x0, s1, s2 = _descent_configs(cfg, obj.dimension)
    rep = directional_descent(obj, s1, s2, target=cfg.get("target"),
                              tags=tags if entry is not None else None)
    b = rep.bound
    doc = {
        "version": __version__,
        "config": cfg,
        "function": cfg["fn"],
        "x0": x0,
        "delta": s1.delta,
        "alpha": s2.alpha,
        "solver": s1.solver,
        "seed": s1.seed,
        "d_star": rep.d_star,
        "skipped_stage2": rep.skipped_stage2,
        "trace": [{"m": m, "x": x, "f": f} for m, x, f in rep.trace],
        "best": {"x": rep.best[0], "f": rep.best[1]},
        "evaluations": rep.evaluations,
        "flatness": rep.flatness,
        "warnings": rep.warnings,
        "bound": None if b is None else {
            "K": b.K, "r": b.r, "dist": b.dist, "m_star": b.m_star,
            "lhs": b.lhs, "rhs": b.rhs, "satisfied": b.satisfied},
    }
    _write(dumps(doc), cfg.get("out"))
    return EXIT_OK


def cmd_verify(cfg: dict) -> int:
    prop = cfg["property"]
    seed = int(cfg["seed"])
    if prop == "caratheodory":
        dims = [int(d) for d in _floats(cfg["dims"])] if cfg.get("dims") else (1, 2, 3)
        report = check_caratheodory(int(cfg["count"]), dims, seed)
    else:
        entry, obj, cloud, _ = _function(cfg)
        fn = entry if entry is not None else obj
        if prop == "direction":
            if cfg.get("x0") is None:
                raise InputError("--x0 is required")
            report = check_optimal_direction(fn, _floats(cfg["x0"]), float(cfg["delta"]),
                                             directions=cfg.get("directions"))
        elif prop == "monotone":
            if cfg.get("x0") is None:
                raise InputError("--x0 is required")
            report = check_monotone_segment(fn, _floats(cfg["x0"]), int(cfg["grid"]))
        elif prop == "envelope":
            if cfg.get("queries"):
                qs = np.array([_floats(q) for q in str(cfg["queries"]).split(";") if q.strip()])
            else:
                lo, hi = cloud.points.min(axis=0), cloud.points.max(axis=0)
                rng = np.random.default_rng(seed)
                qs = np.vstack([cloud.points, rng.uniform(lo, hi, size=(int(cfg["count"]) // 10 or 1, cloud.dim))])
            report = check_envelope_oracle(cloud, qs)
        elif prop == "preservation":
            report = check_minimizer_preservation(cloud, probes=cfg.get("queries") and np.array(
                [_floats(q) for q in str(cfg["queries"]).split(";") if q.strip()]))
        elif prop == "restriction":
            report = check_envelope_restriction(cloud, cfg.get("tol"))
        else:
            report = check_subgradient_equivalence(cloud, cfg.get("tol"))
        report.seed = seed
    doc = {"version": __version__, "config": cfg}
    doc.update(report.to_dict())
    _write(dumps(doc), cfg.get("out"))
    return EXIT_OK if report.passed else EXIT_WITNESS


def cmd_bench(cfg: dict) -> int:
    alphas = _floats(cfg.get("alphas") or "0.2,0.1,0.05,0.025")
    deltas = _floats(cfg.get("deltas") or "0.05,0.1")
    timing = not cfg.get("no_timing")
    header = ["function", "x0", "delta", "alpha", "direction", "solver", "f_best_minus_fstar",
              "K_alpha", "K_r_dist", "lhs", "rhs", "satisfied", "evaluations", "wall_time"]
    rows = []
    for fid, params, x0s in BENCH_FUNCTIONS:
        entry = get_function(fid, **params)
        obj = entry.objective
        x0 = as_point(_floats(x0s), obj.dimension)
        xs = obj.known_minimizer
        d0 = (xs - x0) / np.linalg.norm(xs - x0)
        for delta in deltas:
            for alpha in alphas:
                s1 = Stage1Config(x0, delta, cfg["solver"], int(cfg["budget"]), int(cfg["seed"]))
                s2 = Stage2Config(alpha, None, int(cfg["window"]))
                for kind in ("stage1", "exact"):
                    t0 = time.perf_counter()
                    if kind == "stage1":
                        rep = directional_descent(obj, s1, s2, tags=entry.tags)
                        b = rep.bound
                    else:
                        rep = stage2_march(obj, x0, delta * d0, s2)
                        b = bound_check(obj, x0, delta * d0, alpha)
                    wall = time.perf_counter() - t0 if timing else math.nan
                    rows.append([fid, x0s, delta, alpha, kind, cfg["solver"],
                                 rep.best[1] - obj.known_min_value, b.K * alpha,
                                 b.K * b.r * b.dist, b.lhs, b.rhs, b.satisfied,
                                 rep.evaluations, wall])
    rows.sort(key=lambda r: (r[0], r[2], -r[3], r[4]))
    _write(_csv_text(header, rows, cfg), cfg.get("out"))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file mirroring flag names; flags win")
    common.add_argument("--fn", help="registry id or file:<path> of a cloud CSV")
    common.add_argument("--n", type=int, help="dimension for radial families")
    common.add_argument("--kappa", type=float, help="aniso_quadratic conditioning")
    common.add_argument("--R", type=float, help="truncation radius for the unbounded counterexample")
    common.add_argument("--c", help="center for radial families, comma separated")
    common.add_argument("--mesh", type=float, help="cloud mesh size")
    common.add_argument("--breakpoints", type=int)
    common.add_argument("--pieces", type=int)
    common.add_argument("--radius", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float, help="convexity tolerance")
    common.add_argument("--out", help="output path (default stdout)")

    parser = argparse.ArgumentParser(prog="dirdescent", description=__doc__)
    parser.add_argument("--version", action="version", version=f"dirdescent {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lce", parents=[common], help="envelope over a query grid (CSV)")
    p.add_argument("--queries", help="semicolon-separated points, e.g. '0.1;0.2'")
    p.add_argument("--query-step", type=float)

    sub.add_parser("convexity", parents=[common], help="points-of-convexity mask (CSV)")

    descent_opts = argparse.ArgumentParser(add_help=False)
    descent_opts.add_argument("--x0")
    descent_opts.add_argument("--delta", type=float)
    descent_opts.add_argument("--alpha", type=float)
    descent_opts.add_argument("--solver", choices=SOLVERS)
    descent_opts.add_argument("--budget", type=int)
    descent_opts.add_argument("--window", type=int)

    p = sub.add_parser("descend", parents=[common, descent_opts], help="run directional descent (JSON)")
    p.add_argument("--max-steps", type=int)
    p.add_argument("--target", type=float)

    p = sub.add_parser("verify", parents=[common], help="check a property (CheckReport JSON)")
    p.add_argument("property", choices=PROPERTIES)
    p.add_argument("--x0")
    p.add_argument("--delta", type=float)
    p.add_argument("--directions", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--dims")
    p.add_argument("--queries")

    p = sub.add_parser("bench", parents=[common, descent_opts], help="alpha/delta sweep table (CSV)")
    p.add_argument("--alphas")
    p.add_argument("--deltas")
    p.add_argument("--no-timing", action="store_true", default=None,
                   help="leave wall_time as nan so the table is reproducible byte for byte")
    return parser


COMMANDS = {"lce": cmd_lce, "convexity": cmd_convexity, "descend": cmd_descend,
            "verify": cmd_verify, "bench": cmd_bench}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    try:
        cfg = resolve(args, subparser)
        return COMMANDS[args.command](cfg)
    except (InputError, UnknownFunctionError, FileNotFoundError) as exc:
        print(f"dirdescent: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverStalledError, EnvelopeUnavailableError) as exc:
        print(f"dirdescent: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run_cli())
