"""Registry of benchmark objectives, including the two counterexamples.

Every entry is rebuilt deterministically from ``(id, params)``; random
families take a ``seed`` parameter and draw from ``numpy.random.default_rng``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
from numpy.typing import NDArray

from .core import (
    Domain,
    InputError,
    Interval,
    Objective,
    SampleCloud,
    as_point,
    grid_points,
)


class UnknownFunctionError(KeyError):
    pass


@dataclass(frozen=True, eq=False)
class RegistryEntry:
    id: str
    objective: Objective
    tags: frozenset[str]
    params: dict[str, Any]
    mesh: float
    cloud_points: Callable[[float], NDArray[np.float64]] = field(repr=False)

    def cloud(self, mesh: Optional[float] = None) -> SampleCloud:
        """Canonical sample cloud at ``mesh`` (default: the entry's own mesh)."""
        pts = self.cloud_points(self.mesh if mesh is None else float(mesh))
        return SampleCloud.from_objective(self.objective, pts)


def _pl_eval(xs: NDArray, fs: NDArray) -> Callable[[NDArray], float]:
    def f(p):
        return float(np.interp(p[0], xs, fs))
    return f


def _pl_lipschitz(xs: NDArray, fs: NDArray) -> float:
    return float(np.max(np.abs(np.diff(fs) / np.diff(xs))))


def _ball_grid(center: NDArray, radius: float):
    def points(mesh):
        g = grid_points(center - radius, center + radius, mesh)
        return g[np.linalg.norm(g - center, axis=1) <= radius + 1e-9]
    return points


def _center(n: int, c) -> NDArray:
    if c is None:
        return np.zeros(n)
    cc = np.atleast_1d(np.asarray(c, dtype=float))
    if cc.size == 1 and n > 1:
        cc = np.full(n, float(cc[0]))
    return as_point(cc, n)


def _default_mesh(n: int) -> float:
    return {1: 0.25, 2: 1.0}.get(n, 1.5)


# --------------------------------------------------------------------------
# builders


def _abs1d(mesh=0.1):
    obj = Objective(1, lambda p: abs(float(p[0])), Domain.box([-1.0], [1.0]), 1.0,
                    known_minimizer=[0.0], known_min_value=0.0,
                    subgradient_hint=lambda p: np.sign(p), name="abs1d")
    return obj, {"convex", "lsc", "unique-min"}, {}, mesh, lambda h: grid_points([-1], [1], h)


def _norm_radial(n=2, c=None, radius=3.0, mesh=None):
    n = int(n)
    cen = _center(n, c)

    def f(p):
        return float(np.linalg.norm(p - cen))

    def sub(p):
        d = p - cen
        r = np.linalg.norm(d)
        return d / r if r > 0 else np.zeros(n)

    obj = Objective(n, f, Domain.ball(cen, radius), 1.0, known_minimizer=cen,
                    known_min_value=0.0, subgradient_hint=sub, name="norm_radial")
    mesh = _default_mesh(n) if mesh is None else mesh
    params = {"n": n, "c": cen.tolist(), "radius": float(radius)}
    return obj, {"convex", "radial", "lsc", "unique-min"}, params, mesh, _ball_grid(cen, radius)


def _sq_radial(n=2, c=None, radius=3.0, mesh=None):
    n = int(n)
    cen = _center(n, c)

    def f(p):
        d = p - cen
        return float(d @ d)

    obj = Objective(n, f, Domain.ball(cen, radius), 2.0 * radius, known_minimizer=cen,
                    known_min_value=0.0, subgradient_hint=lambda p: 2.0 * (p - cen),
                    name="sq_radial")
    mesh = _default_mesh(n) if mesh is None else mesh
    params = {"n": n, "c": cen.tolist(), "radius": float(radius)}
    return obj, {"convex", "radial", "lsc", "unique-min"}, params, mesh, _ball_grid(cen, radius)


def _aniso_quadratic(kappa=10.0, half_width=2.0, mesh=1.0):
    kappa = float(kappa)
    if kappa <= 0:
        raise InputError("kappa must be positive")
    w = np.array([1.0, kappa])

    def f(p):
        return float(p[0] ** 2 + kappa * p[1] ** 2)

    # gradient norm 2*|(x1, kappa x2)| is largest at a corner of the box
    k = 2.0 * half_width * math.hypot(1.0, kappa)
    obj = Objective(2, f, Domain.box([-half_width] * 2, [half_width] * 2), k,
                    known_minimizer=[0.0, 0.0], known_min_value=0.0,
                    subgradient_hint=lambda p: 2.0 * w * p, name="aniso_quadratic")
    params = {"kappa": kappa, "half_width": float(half_width)}
    return (obj, {"convex", "lsc", "unique-min"}, params, mesh,
            lambda h: grid_points([-half_width] * 2, [half_width] * 2, h))


W_VERTICES = ((-1.0, 0.8), (-0.5, 0.2), (0.0, 0.5), (0.5, 0.0), (1.0, 0.9))


def _w_piecewise(mesh=0.05):
    xs = np.array([v[0] for v in W_VERTICES])
    fs = np.array([v[1] for v in W_VERTICES])
    obj = Objective(1, _pl_eval(xs, fs), Domain.box([-1.0], [1.0]), _pl_lipschitz(xs, fs),
                    known_minimizer=[0.5], known_min_value=0.0, name="w_piecewise")
    return obj, {"nonconvex", "lsc", "unique-min"}, {}, mesh, lambda h: grid_points([-1], [1], h)


def _plateau_flat(mesh=0.1):
    obj = Objective(1, lambda p: max(0.0, abs(float(p[0])) - 0.5), Domain.box([-1.0], [1.0]), 1.0,
                    known_minimizer=[0.0], known_min_value=0.0, name="plateau_flat")
    return obj, {"convex", "lsc"}, {}, mesh, lambda h: grid_points([-1], [1], h)


def _lsc_counterexample(mesh=0.01):
    # f(0) = 0, f(x) = x - 1/2 on (1/2, 1], +inf elsewhere
    def f(p):
        x = float(p[0])
        return 0.0 if abs(x) <= 1e-9 else x - 0.5

    dom = Domain.union_of_intervals([Interval(0.0, 0.0), Interval(0.5, 1.0, lo_closed=False)])
    obj = Objective(1, f, dom, 1.0, known_minimizer=[0.0], known_min_value=0.0,
                    name="lsc_counterexample")

    def points(h):
        k = np.arange(1, int(math.floor(0.5 / h + 1e-9)) + 1)
        return np.concatenate([[0.0], np.round(0.5 + h * k, 12)])[:, None]

    return obj, {"counterexample", "nonconvex"}, {}, mesh, points


def _unbounded_truncated(R=5.0, mesh=0.1):
    R = float(R)
    if R < 1:
        raise InputError("truncation radius R must be >= 1")

    def f(p):
        x = abs(float(p[0]))
        return x if x <= 1.0 else 1.0

    obj = Objective(1, f, Domain.box([-R], [R]), 1.0, known_minimizer=[0.0], known_min_value=0.0,
                    name="unbounded_counterexample_truncated")
    return (obj, {"counterexample", "nonconvex", "lsc", "unique-min"}, {"R": R}, mesh,
            lambda h: grid_points([-R], [R], h))


def _random_pl(seed=0, breakpoints=5, mesh=0.05):
    """Seeded nonconvex piecewise-linear function on [-1, 1] with a unique minimum 0.

    Breakpoints sit on the mesh grid so the canonical cloud contains every vertex.
    """
    rng = np.random.default_rng(int(seed))
    grid = grid_points([-1], [1], mesh)[:, 0]
    inner = np.sort(rng.choice(grid[1:-1], size=int(breakpoints), replace=False))
    xs = np.concatenate([[grid[0]], inner, [grid[-1]]])
    fs = rng.uniform(0.1, 1.0, size=xs.size)
    fs[rng.integers(xs.size)] = 0.0
    xmin = xs[np.argmin(fs)]
    obj = Objective(1, _pl_eval(xs, fs), Domain.box([-1.0], [1.0]), _pl_lipschitz(xs, fs),
                    known_minimizer=[xmin], known_min_value=0.0, name="random_pl")
    params = {"seed": int(seed), "breakpoints": int(breakpoints)}
    return obj, {"nonconvex", "lsc", "unique-min"}, params, mesh, lambda h: grid_points([-1], [1], h)


def _radial_pl(n=2, seed=0, pieces=4, radius=3.0, mesh=None):
    """phi(|x - c|) with phi convex, increasing, piecewise linear, phi(0) = 0.

    Slopes are drawn from [0.2, 2] and sorted so phi is convex.
    """
    n = int(n)
    rng = np.random.default_rng(int(seed))
    cen = np.round(rng.uniform(-0.5, 0.5, size=n), 6)
    slopes = np.sort(rng.uniform(0.2, 2.0, size=int(pieces)))
    knots = np.concatenate([[0.0], np.sort(rng.uniform(0.1, 2.5, size=int(pieces) - 1))])

    bends = np.diff(slopes, prepend=0.0)

    def phi(r):
        return float(bends @ np.clip(r - knots, 0.0, None))

    def f(p):
        return phi(float(np.linalg.norm(p - cen)))

    obj = Objective(n, f, Domain.ball(cen, radius), float(slopes[-1]), known_minimizer=cen,
                    known_min_value=0.0, name="radial_pl")
    mesh = _default_mesh(n) if mesh is None else mesh
    params = {"n": n, "seed": int(seed), "pieces": int(pieces), "radius": float(radius)}
    return obj, {"convex", "radial", "lsc", "unique-min"}, params, mesh, _ball_grid(cen, radius)


_BUILDERS: dict[str, Callable] = {
    "abs1d": _abs1d,
    "aniso_quadratic": _aniso_quadratic,
    "lsc_counterexample": _lsc_counterexample,
    "norm_radial": _norm_radial,
    "plateau_flat": _plateau_flat,
    "radial_pl": _radial_pl,
    "random_pl": _random_pl,
    "sq_radial": _sq_radial,
    "unbounded_counterexample_truncated": _unbounded_truncated,
    "w_piecewise": _w_piecewise,
}


def get_function(id: str, **params) -> RegistryEntry:
    """Build registry entry ``id``; ``params`` are the builder's keyword arguments."""
    try:
        builder = _BUILDERS[id]
    except KeyError:
        raise UnknownFunctionError(f"unknown function id {id!r}") from None
    params = {k: v for k, v in params.items() if v is not None}
    try:
        obj, tags, resolved, mesh, pts = builder(**params)
    except TypeError as exc:
        raise InputError(f"bad parameters for {id}: {exc}") from None
    resolved = dict(resolved)
    resolved["mesh"] = float(mesh)
    return RegistryEntry(id, obj, frozenset(tags), resolved, float(mesh), pts)


def list_functions() -> list[tuple[str, frozenset[str]]]:
    return [(fid, get_function(fid).tags) for fid in sorted(_BUILDERS)]


def function_params(id: str) -> list[str]:
    """Keyword parameters accepted by registry entry ``id``."""
    import inspect

    try:
        builder = _BUILDERS[id]
    except KeyError:
        raise UnknownFunctionError(f"unknown function id {id!r}") from None
    return list(inspect.signature(builder).parameters)
