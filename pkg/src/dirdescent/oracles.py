"""Executable property checkers that return a CheckReport with concrete violation witnesses."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike

from .core import INF, InputError, Objective, SampleCloud, as_point, evaluate
from .descent import sphere_directions
from .envelope import (
    convexity_set,
    default_tol,
    hull_boundary_mask,
    lce_value,
    subgradient_certificate,
)
from .hull_lp import WeightedCombination, caratheodory_reduce
from .testfns import RegistryEntry, get_function

MAX_WITNESSES = 100
VIOLATION_TOL = 1e-9
EQUALITY_BAND = 1e-9
MONOTONE_SLACK = 1e-12


class CheckUnavailableError(InputError):
    pass


@dataclass
class ViolationWitness:
    property: str
    inputs: dict[str, Any]
    observed: dict[str, float]
    margin: float

    def sort_key(self):
        return (-self.margin, repr(sorted(self.inputs.items())))

    def to_dict(self) -> dict:
        return {"property": self.property, "inputs": self.inputs,
                "observed": self.observed, "margin": self.margin}


@dataclass
class CheckReport:
    property: str
    instances: int
    violations: list[ViolationWitness]
    seed: Optional[int] = None
    tolerances: dict[str, float] = field(default_factory=dict)
    diagnostics: dict[str, Any] = field(default_factory=dict)
    total_violations: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "passed": self.passed,
            "instances": self.instances,
            "total_violations": self.total_violations,
            "violations": [w.to_dict() for w in self.violations],
            "seed": self.seed,
            "tolerances": self.tolerances,
            "diagnostics": self.diagnostics,
        }


def _report(prop: str, instances: int, witnesses: list[ViolationWitness], **kw) -> CheckReport:
    witnesses = sorted(witnesses, key=ViolationWitness.sort_key)
    return CheckReport(prop, instances, witnesses[:MAX_WITNESSES],
                       total_violations=len(witnesses), **kw)


FunctionLike = Union[RegistryEntry, Objective]


def _resolve(fn: FunctionLike) -> tuple[Objective, Optional[dict]]:
    if isinstance(fn, RegistryEntry):
        return fn.objective, {"id": fn.id, "params": fn.params}
    return fn, None


def _plain(x) -> list[float]:
    return [float(v) for v in np.atleast_1d(x)]


# --------------------------------------------------------------------------
# optimal direction on the delta-ball


def check_optimal_direction(fn: FunctionLike, x0: ArrayLike, delta: float,
                            directions: Optional[int] = None, radial_levels: int = 4,
                            separation: float = 1e-3) -> CheckReport:
    """Sweep the delta-ball around x0 looking for f(x0 + d) < f(x0 + delta * d0).

    Directions come from ``sphere_directions`` (720 angles in 2-D, 2000
    Fibonacci points in 3-D by default) at radius delta and at
    ``radial_levels - 1`` smaller radii; in 1-D the sweep is a uniform grid on
    [-delta, delta]. Equal values (within 1e-9) at directions farther than
    ``separation`` radians from d0 are reported as strictness violations.
    """
    obj, ident = _resolve(fn)
    if obj.known_minimizer is None:
        raise CheckUnavailableError("optimal-direction check needs a known minimizer")
    p0 = as_point(x0, obj.dimension)
    xs = obj.known_minimizer
    r = float(np.linalg.norm(xs - p0))
    if r == 0.0:
        raise InputError("x0 must differ from the minimizer")
    if not 0 < delta <= r + 1e-12:
        raise InputError(f"need 0 < delta <= |x* - x0| = {r}")
    d0 = (xs - p0) / r
    ref = evaluate(obj, p0 + delta * d0)
    n = obj.dimension

    if n == 1:
        count = directions or 21
        offsets = np.linspace(-delta, delta, count)[:, None]
    else:
        count = directions or (720 if n == 2 else 2000)
        dirs = sphere_directions(n, count)
        radii = delta * np.arange(radial_levels, 0, -1) / radial_levels
        offsets = np.concatenate([rad * dirs for rad in radii])

    cos_sep = math.cos(separation)
    witnesses = []
    for d in offsets:
        v = evaluate(obj, p0 + d)
        norm = float(np.linalg.norm(d))
        inputs = {"function": ident, "x0": _plain(p0), "delta": float(delta), "d": _plain(d)}
        if v < ref - VIOLATION_TOL:
            witnesses.append(ViolationWitness(
                "optimal_direction", inputs,
                {"f(x0+d)": v, "f(x0+delta*d0)": ref}, ref - v))
        elif abs(v - ref) <= EQUALITY_BAND and norm > 0:
            far = (d @ d0) / norm < cos_sep or norm < delta * (1 - 1e-12)
            if far:
                witnesses.append(ViolationWitness(
                    "optimal_direction_strict", inputs,
                    {"f(x0+d)": v, "f(x0+delta*d0)": ref},
                    float(np.linalg.norm(d - delta * d0))))
    return _report("optimal_direction", len(offsets), witnesses,
                   tolerances={"violation": VIOLATION_TOL, "equality_band": EQUALITY_BAND,
                               "separation": separation},
                   diagnostics={"reference": ref, "d0": _plain(d0), "r": r})


# --------------------------------------------------------------------------
# strict decrease along the segment to the minimizer


def check_monotone_segment(fn: FunctionLike, x0: ArrayLike, grid: int = 50) -> CheckReport:
    """Check f(z_beta) < f(z_alpha) for every grid pair alpha < beta, z_t = x0 + t (x* - x0).

    A pair counts as a violation unless the decrease exceeds 1e-12.
    """
    obj, ident = _resolve(fn)
    if obj.known_minimizer is None:
        raise CheckUnavailableError("monotone check needs a known minimizer")
    p0 = as_point(x0, obj.dimension)
    seg = obj.known_minimizer - p0
    if np.linalg.norm(seg) == 0:
        raise InputError("x0 must differ from the minimizer")
    ts = np.linspace(0.0, 1.0, grid)
    vals = np.array([evaluate(obj, p0 + t * seg) for t in ts])
    witnesses = []
    for i, j in combinations(range(grid), 2):
        gap = vals[j] - vals[i] + MONOTONE_SLACK
        if not vals[j] < vals[i] - MONOTONE_SLACK:
            witnesses.append(ViolationWitness(
                "monotone_segment",
                {"function": ident, "x0": _plain(p0), "alpha": float(ts[i]), "beta": float(ts[j])},
                {"f(z_alpha)": float(vals[i]), "f(z_beta)": float(vals[j])},
                float(gap) if gap > 0 else MONOTONE_SLACK))
    return _report("monotone_segment", grid * (grid - 1) // 2, witnesses,
                   tolerances={"slack": MONOTONE_SLACK})


# --------------------------------------------------------------------------
# brute-force envelope


def lce_bruteforce(cloud: SampleCloud, x: ArrayLike) -> float:
    """Envelope by enumerating singletons, pairs and (in 2-D) triples of samples.

    Each candidate's barycentric weights are solved in closed form;
    Caratheodory says n+1 points are enough. Limits: n <= 2; at most 400
    points in 1-D and 40 in 2-D.
    """
    q = as_point(x, cloud.dim)
    n, m = cloud.dim, len(cloud)
    if n > 2:
        raise InputError("lce_bruteforce supports n <= 2")
    if (n == 1 and m > 400) or (n == 2 and m > 40):
        raise InputError("cloud too large for brute force")
    P, F = cloud.points, cloud.values
    eps = 1e-12
    best = INF

    same = np.linalg.norm(P - q, axis=1) <= 1e-12
    if same.any():
        best = float(F[same].min())

    # pairs: q on segment [a, b]
    i, j = np.triu_indices(m, 1)
    a, b = P[i], P[j]
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    t = np.einsum("ij,j->i", ab, q) - np.einsum("ij,ij->i", ab, a)
    t = np.divide(t, L2, out=np.zeros_like(t), where=L2 > 0)
    on = (t >= -eps) & (t <= 1 + eps)
    if n > 1:
        resid = np.linalg.norm(a + t[:, None] * ab - q, axis=1)
        on &= resid <= 1e-10
    if on.any():
        tt = np.clip(t[on], 0.0, 1.0)
        best = min(best, float(np.min((1 - tt) * F[i[on]] + tt * F[j[on]])))

    if n == 2 and m >= 3:
        tri = np.array(list(combinations(range(m), 3)))
        A, B, C = P[tri[:, 0]], P[tri[:, 1]], P[tri[:, 2]]
        v0, v1 = B - A, C - A
        det = v0[:, 0] * v1[:, 1] - v0[:, 1] * v1[:, 0]
        ok = np.abs(det) > 1e-14
        w = q - A
        l1 = np.where(ok, (w[:, 0] * v1[:, 1] - w[:, 1] * v1[:, 0]) / np.where(ok, det, 1), -1)
        l2 = np.where(ok, (v0[:, 0] * w[:, 1] - v0[:, 1] * w[:, 0]) / np.where(ok, det, 1), -1)
        l0 = 1 - l1 - l2
        inside = ok & (l0 >= -eps) & (l1 >= -eps) & (l2 >= -eps)
        if inside.any():
            s = tri[inside]
            vals = (l0[inside] * F[s[:, 0]] + l1[inside] * F[s[:, 1]] + l2[inside] * F[s[:, 2]])
            best = min(best, float(vals.min()))
    return best


def check_envelope_oracle(cloud: SampleCloud, queries: ArrayLike, tol: float = 1e-8) -> CheckReport:
    """Compare the LP envelope with the brute-force envelope at each query."""
    qs = np.asarray(queries, dtype=float).reshape(-1, cloud.dim)
    witnesses = []
    for q in qs:
        lp = lce_value(cloud, q).value
        bf = lce_bruteforce(cloud, q)
        both_inf = math.isinf(lp) and math.isinf(bf)
        diff = 0.0 if both_inf else abs(lp - bf)
        if diff > tol:
            witnesses.append(ViolationWitness(
                "envelope_oracle", {"query": _plain(q), "cloud": _cloud_inputs(cloud)},
                {"lp": lp, "bruteforce": bf}, diff if math.isfinite(diff) else 1.0))
    return _report("envelope_oracle", len(qs), witnesses, tolerances={"value": tol})


def _cloud_inputs(cloud: SampleCloud) -> dict:
    return {"points": cloud.points.tolist(), "values": cloud.values.tolist()}


# --------------------------------------------------------------------------
# minimizer preservation and restriction to points of convexity


def check_minimizer_preservation(cloud: SampleCloud, tol: float = 1e-9,
                                 probes: Optional[ArrayLike] = None) -> CheckReport:
    """Argmin of f and argmin of the envelope over the cloud must coincide and be unique.

    The flatness diagnostic reports envelope values at ``probes``.
    """
    env = np.array([lce_value(cloud, p).value for p in cloud.points])
    i_f = int(np.argmin(cloud.values))
    i_e = int(np.argmin(env))
    ordered = np.sort(env)
    margin = float(ordered[1] - ordered[0]) if len(cloud) > 1 else INF
    witnesses = []
    observed = {"f_min": float(cloud.values[i_f]), "env_min": float(env[i_e]),
                "env_second": float(ordered[1]) if len(cloud) > 1 else INF}
    inputs = {"argmin_f": _plain(cloud.points[i_f]), "argmin_env": _plain(cloud.points[i_e])}
    if np.linalg.norm(cloud.points[i_f] - cloud.points[i_e]) > 1e-12:
        witnesses.append(ViolationWitness(
            "minimizer_preservation", inputs, observed,
            float(np.linalg.norm(cloud.points[i_f] - cloud.points[i_e]))))
    elif not margin > tol:
        witnesses.append(ViolationWitness("minimizer_uniqueness", inputs, observed, tol - margin))
    diag: dict[str, Any] = {"argmin": _plain(cloud.points[i_f]), "uniqueness_margin": margin}
    if probes is not None:
        pr = np.asarray(probes, dtype=float).reshape(-1, cloud.dim)
        diag["flatness"] = [{"x": _plain(p), "lce": lce_value(cloud, p).value} for p in pr]
    return _report("minimizer_preservation", len(cloud), witnesses,
                   tolerances={"uniqueness": tol}, diagnostics=diag)


def check_envelope_restriction(cloud: SampleCloud, tol: Optional[float] = None,
                               match_tol: float = 1e-7) -> CheckReport:
    """The envelope built from points of convexity alone must equal the full envelope.

    Also checks that the common envelope equals f at every point of convexity.
    """
    mask = convexity_set(cloud, tol)
    sub = cloud.subset(mask.in_af)
    witnesses = []
    for k, p in enumerate(cloud.points):
        full = mask.envelope[k]
        restricted = lce_value(sub, p).value
        diff = abs(full - restricted) if math.isfinite(restricted) else INF
        inputs = {"x": _plain(p)}
        if diff > match_tol:
            witnesses.append(ViolationWitness(
                "envelope_restriction", inputs, {"full": float(full), "restricted": restricted},
                diff if math.isfinite(diff) else 1.0))
        if mask.in_af[k] and abs(restricted - cloud.values[k]) > match_tol:
            witnesses.append(ViolationWitness(
                "envelope_restriction_value", inputs,
                {"f": float(cloud.values[k]), "restricted": restricted},
                abs(restricted - cloud.values[k]) if math.isfinite(restricted) else 1.0))
    return _report("envelope_restriction", len(cloud), witnesses,
                   tolerances={"convexity": mask.tol, "match": match_tol},
                   diagnostics={"points_of_convexity": int(mask.in_af.sum())})


# --------------------------------------------------------------------------
# subgradients vs points of convexity


def check_subgradient_equivalence(cloud: SampleCloud, tol: Optional[float] = None,
                                  include_boundary: bool = False) -> CheckReport:
    """At interior cloud points: a subgradient certificate exists iff the point is in A_f.

    At every point (boundary included) a certificate must imply membership.
    """
    if tol is None:
        tol = default_tol(cloud)
    mask = convexity_set(cloud, tol)
    boundary = hull_boundary_mask(cloud)
    witnesses = []
    for k, p in enumerate(cloud.points):
        cert = subgradient_certificate(cloud, p, tol)
        interior = not boundary[k]
        mismatch = cert.feasible != bool(mask.in_af[k])
        if mismatch and (interior or include_boundary or cert.feasible):
            witnesses.append(ViolationWitness(
                "subgradient_equivalence", {"z": _plain(p), "interior": interior},
                {"subgradient_gap": cert.gap, "convexity_gap": float(mask.gap[k])},
                abs(cert.gap - max(0.0, float(mask.gap[k]))) or tol))
    return _report("subgradient_equivalence", len(cloud), witnesses,
                   tolerances={"convexity": tol},
                   diagnostics={"interior_points": int((~boundary).sum())})


# --------------------------------------------------------------------------
# Caratheodory


def random_combination(rng: np.random.Generator, n: int, max_points: int = 12):
    k = int(rng.integers(1, max_points + 1))
    pts = rng.uniform(-1.0, 1.0, size=(k, n))
    w = rng.uniform(0.0, 1.0, size=k)
    w[rng.uniform(size=k) < 0.15] = 0.0
    if w.sum() == 0:
        w[0] = 1.0
    vals = rng.uniform(-1.0, 1.0, size=k)
    return WeightedCombination(pts, w / w.sum()), vals


def check_caratheodory(count: int = 1000, dims: Sequence[int] = (1, 2, 3), seed: int = 0,
                       max_points: int = 12, tol: float = 1e-9) -> CheckReport:
    """Seeded random reductions: barycenter kept, at most n+1 points, weighted value not raised."""
    rng = np.random.default_rng(seed)
    witnesses = []
    for t in range(count):
        n = int(dims[t % len(dims)])
        comb, vals = random_combination(rng, n, max_points)
        out, idx = caratheodory_reduce(comb, vals, return_indices=True)
        drift = float(np.linalg.norm(out.barycenter - comb.barycenter))
        before = float(comb.weights @ vals)
        after = float(out.weights @ vals[idx])
        inputs = {"trial": t, "n": n, "points": comb.points.tolist(), "weights": comb.weights.tolist()}
        if drift > tol:
            witnesses.append(ViolationWitness("caratheodory_barycenter", inputs, {"drift": drift}, drift))
        if len(out) > n + 1 or np.any(out.weights <= 0):
            witnesses.append(ViolationWitness("caratheodory_support", inputs,
                                              {"support": float(len(out))}, float(len(out) - n - 1)))
        if after > before + tol:
            witnesses.append(ViolationWitness("caratheodory_value", inputs,
                                              {"before": before, "after": after}, after - before))
    return _report("caratheodory", count, witnesses, seed=seed, tolerances={"barycenter": tol})


# --------------------------------------------------------------------------
# replay


def replay(w: ViolationWitness, obj: Optional[Objective] = None) -> float:
    """Recompute a witness's margin from its recorded inputs."""
    if w.property in ("optimal_direction", "optimal_direction_strict", "monotone_segment"):
        fn = w.inputs.get("function")
        if obj is None:
            if fn is None:
                raise InputError("witness has no registry function; pass obj")
            obj = get_function(fn["id"], **fn["params"]).objective
        p0 = as_point(w.inputs["x0"])
        xs = obj.known_minimizer
        if w.property == "monotone_segment":
            seg = xs - p0
            fa = evaluate(obj, p0 + w.inputs["alpha"] * seg)
            fb = evaluate(obj, p0 + w.inputs["beta"] * seg)
            gap = fb - fa + MONOTONE_SLACK
            return gap if gap > 0 else MONOTONE_SLACK
        delta = w.inputs["delta"]
        d = as_point(w.inputs["d"])
        r = float(np.linalg.norm(xs - p0))
        ref = evaluate(obj, p0 + delta * (xs - p0) / r)
        if w.property == "optimal_direction":
            return ref - evaluate(obj, p0 + d)
        return float(np.linalg.norm(d - delta * (xs - p0) / r))
    if w.property == "envelope_oracle":
        c = w.inputs["cloud"]
        cloud = SampleCloud(np.array(c["points"]), np.array(c["values"]))
        return abs(lce_value(cloud, w.inputs["query"]).value - lce_bruteforce(cloud, w.inputs["query"]))
    raise InputError(f"no replay rule for property {w.property!r}")
