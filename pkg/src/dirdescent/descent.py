"""Directional descent: a ball-constrained first stage and a fixed-step march along its direction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import INF, InputError, Objective, as_point, evaluate

SOLVERS = ("angular-grid", "projected-subgradient", "compass-search")
BOUND_TOL = 1e-9


class InvalidBallError(InputError):
    pass


class BoundUnavailableError(InputError):
    pass


@dataclass(frozen=True)
class Stage1Config:
    x0: NDArray[np.float64]
    delta: float
    solver: str = "compass-search"
    budget: int = 2000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "x0", as_point(self.x0))
        if not self.delta > 0:
            raise InputError("delta must be positive")
        if self.budget < 1:
            raise InputError("budget must be >= 1")
        if self.solver not in SOLVERS:
            raise InputError(f"unknown stage-1 solver {self.solver!r}; choose from {SOLVERS}")


@dataclass(frozen=True)
class Stage2Config:
    alpha: float
    max_steps: Optional[int] = None  # None: ceil(domain diameter / alpha)
    window: int = 3

    def __post_init__(self):
        if not self.alpha > 0:
            raise InputError("alpha must be positive")
        if self.max_steps is not None and self.max_steps < 1:
            raise InputError("max_steps must be >= 1")
        if self.window < 1:
            raise InputError("window must be >= 1")


@dataclass(frozen=True)
class Stage1Result:
    d_star: NDArray[np.float64]
    value: float
    evaluations: int
    zero_progress: bool
    ball_best: NDArray[np.float64]  # best in-ball point found (may be interior)
    ball_best_value: float


@dataclass(frozen=True)
class BoundCheck:
    K: float
    r: float
    dist: float
    m_star: int
    lhs: float
    rhs: float
    satisfied: bool


@dataclass
class DescentReport:
    d_star: NDArray[np.float64]
    trace: list[tuple[int, NDArray[np.float64], float]]
    best: tuple[NDArray[np.float64], float]
    evaluations: int
    bound: Optional[BoundCheck] = None
    skipped_stage2: bool = False
    zero_progress: bool = False
    flatness: float = math.nan
    warnings: list[str] = field(default_factory=list)


# --------------------------------------------------------------------------
# direction sets


def sphere_directions(n: int, count: int) -> NDArray[np.float64]:
    """Deterministic unit directions: {-1, +1} in 1-D, an angle grid in 2-D, a Fibonacci sphere in 3-D."""
    if n == 1:
        return np.array([[-1.0], [1.0]])
    if n == 2:
        theta = 2.0 * np.pi * np.arange(count) / count
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if n == 3:
        i = np.arange(count) + 0.5
        z = 1.0 - 2.0 * i / count
        rho = np.sqrt(1.0 - z * z)
        phi = np.pi * (3.0 - math.sqrt(5.0)) * i
        return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    raise InputError("direction grids exist only for n <= 3")


# --------------------------------------------------------------------------
# stage 1


class _Counter:
    def __init__(self, obj: Objective, x0: NDArray):
        self.obj, self.x0, self.count = obj, x0, 0

    def __call__(self, d: NDArray) -> float:
        self.count += 1
        return evaluate(self.obj, self.x0 + d)


def _angular_grid(f: _Counter, n: int, delta: float, budget: int):
    dirs = sphere_directions(n, budget)
    vals = np.array([f(delta * u) for u in dirs])
    i = int(np.argmin(vals))  # argmin returns the first (lowest index) minimum
    return dirs[i], float(vals[i])


def _compass_search(f: _Counter, n: int, delta: float, budget: int, seed: int):
    """Compass search on the delta-sphere.

    Probes u +/- step * e_i renormalized to the sphere, halving the step
    after a sweep with no improvement.
    """
    rng = np.random.default_rng(seed)
    starts = np.vstack([np.eye(n), -np.eye(n), rng.standard_normal((1, n))])
    starts /= np.linalg.norm(starts, axis=1, keepdims=True)
    best_u, best_v = None, INF
    for u in starts:
        v = f(delta * u)
        if v < best_v:
            best_u, best_v = u, v
    if n == 1:
        return best_u, best_v
    step = 0.5
    while step >= 1e-4 and f.count < budget:
        improved = False
        for i in range(n):
            for sign in (1.0, -1.0):
                if f.count >= budget:
                    break
                cand = best_u.copy()
                cand[i] += sign * step
                norm = np.linalg.norm(cand)
                if norm == 0.0:
                    continue
                cand /= norm
                v = f(delta * cand)
                if v < best_v:
                    best_u, best_v, improved = cand, v, True
        if not improved:
            step *= 0.5
    return best_u, best_v


def _numeric_subgradient(obj: Objective, x: NDArray, h: float) -> NDArray:
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fp, fm = evaluate(obj, x + e), evaluate(obj, x - e)
        if math.isfinite(fp) and math.isfinite(fm):
            g[i] = (fp - fm) / (2 * h)
        elif math.isfinite(fp):
            g[i] = (fp - evaluate(obj, x)) / h
        elif math.isfinite(fm):
            g[i] = (evaluate(obj, x) - fm) / h
    return g


def _projected_subgradient(f: _Counter, obj: Objective, x0: NDArray, delta: float, budget: int):
    """Subgradient steps delta / (K sqrt(k)) projected back onto the ball; keeps the best iterate."""
    n = x0.size
    K = obj.lipschitz_k
    h = 1e-7 * max(1.0, delta)
    d = np.zeros(n)
    best_d, best_v = d.copy(), f(d)
    k = 1
    while f.count < budget:
        x = x0 + d
        if obj.subgradient_hint is not None:
            g = np.asarray(obj.subgradient_hint(x), dtype=float).reshape(n)
        else:
            g = _numeric_subgradient(obj, x, h)
            f.count += 2 * n
        gn = np.linalg.norm(g)
        if gn == 0.0:
            break
        d = d - (delta / (K * math.sqrt(k))) * g
        dn = np.linalg.norm(d)
        if dn > delta:
            d *= delta / dn
        v = f(d)
        if v < best_v:
            best_d, best_v = d.copy(), v
        k += 1
    return best_d, best_v


def _radial_refine(f: _Counter, u: NDArray, delta: float, tol: float = 1e-12):
    """Golden-section search for the best radius along u within [0, delta]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = 0.0, delta
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c * u), f(d * u)
    while b - a > tol * max(1.0, delta):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c * u)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d * u)
    t = 0.5 * (a + b)
    return t, f(t * u)


def stage1_direction(obj: Objective, cfg: Stage1Config) -> Stage1Result:
    """Approximate argmin of f(x0 + d) over |d| <= delta, reported as a direction of norm delta."""
    x0 = as_point(cfg.x0, obj.dimension)
    if not obj.domain.contains_ball(x0, cfg.delta):
        raise InvalidBallError(f"ball of radius {cfg.delta} around x0 leaves the domain")
    f = _Counter(obj, x0)
    n = obj.dimension
    f0 = f(np.zeros(n))

    if cfg.solver == "angular-grid":
        u, v = _angular_grid(f, n, cfg.delta, cfg.budget)
        ball_d, ball_v = cfg.delta * u, v
    elif cfg.solver == "compass-search":
        u, v = _compass_search(f, n, cfg.delta, cfg.budget, cfg.seed)
        ball_d, ball_v = cfg.delta * u, v
    else:
        ball_d, ball_v = _projected_subgradient(f, obj, x0, cfg.delta, cfg.budget)
        norm = np.linalg.norm(ball_d)
        if norm > 0:
            u = ball_d / norm
            v = f(cfg.delta * u)
        else:
            u, v = np.eye(n)[0], f(cfg.delta * np.eye(n)[0])

    # f is convex on the ball, so the best radius along u is found by a 1-D search
    t, tv = _radial_refine(f, u, cfg.delta)
    if tv < ball_v:
        ball_d, ball_v = t * u, tv
    zero_progress = not (min(v, ball_v) < f0)
    return Stage1Result(cfg.delta * u, float(v), f.count, zero_progress, x0 + ball_d, float(ball_v))


# --------------------------------------------------------------------------
# stage 2


def stage2_march(obj: Objective, x0: ArrayLike, d_star: ArrayLike, cfg: Stage2Config) -> DescentReport:
    """March x_m = x0 + m * alpha * d_star / |d_star| until the stop rule fires.

    Iterates are computed from m directly, never by repeated addition. The
    march stops after ``cfg.window`` consecutive non-improvements (out-of-domain
    points count as such) or at ``max_steps``.
    """
    x0 = as_point(x0, obj.dimension)
    d = as_point(d_star, obj.dimension)
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        raise InputError("d_star must be nonzero")
    u = d / norm
    max_steps = cfg.max_steps
    if max_steps is None:
        max_steps = max(1, math.ceil(obj.domain.diameter() / cfg.alpha))

    trace = []
    best_x, best_v = None, INF
    misses = 0
    for m in range(max_steps + 1):
        x = x0 + (m * cfg.alpha) * u
        v = evaluate(obj, x)
        trace.append((m, x, v))
        if v < best_v:
            best_x, best_v, misses = x, v, 0
        else:
            misses += 1
            if misses >= cfg.window:
                break
    if best_x is None:
        best_x = x0
    return DescentReport(d, trace, (best_x, best_v), len(trace))


# --------------------------------------------------------------------------
# bound


def error_bound(K: float, r: float, alpha: float, d_unit: ArrayLike, d0: ArrayLike,
                lhs: float) -> BoundCheck:
    """Lipschitz bound  f(x_m) - f(x*) <= K alpha + K r |d - d0|  at m = floor(r / alpha)."""
    if not (K > 0 and r > 0 and alpha > 0):
        raise InputError("K, r and alpha must be positive")
    du, dz = as_point(d_unit), as_point(d0)
    if abs(np.linalg.norm(du) - 1.0) > 1e-9 or abs(np.linalg.norm(dz) - 1.0) > 1e-9:
        raise InputError("d_unit and d0 must be unit vectors")
    dist = float(np.linalg.norm(du - dz))
    m_star = int(math.floor(r / alpha + 1e-12))
    rhs = K * alpha + K * r * dist
    return BoundCheck(float(K), float(r), dist, m_star, float(lhs), rhs, bool(lhs <= rhs + BOUND_TOL))


def bound_check(obj: Objective, x0: ArrayLike, d_star: ArrayLike, alpha: float) -> BoundCheck:
    """Evaluate the error bound for a run from x0 along d_star; needs a known minimizer."""
    if obj.known_minimizer is None:
        raise BoundUnavailableError("objective has no known minimizer")
    x0 = as_point(x0, obj.dimension)
    xs = obj.known_minimizer
    diff = xs - x0
    r = float(np.linalg.norm(diff))
    if r == 0.0:
        raise BoundUnavailableError("x0 is already the minimizer")
    d = as_point(d_star, obj.dimension)
    u = d / np.linalg.norm(d)
    m_star = int(math.floor(r / alpha + 1e-12))
    x_m = x0 + (m_star * alpha) * u
    lhs = evaluate(obj, x_m) - obj.known_min_value
    return error_bound(obj.lipschitz_k, r, alpha, u, diff / r, lhs)


# --------------------------------------------------------------------------
# full algorithm


def directional_descent(obj: Objective, s1: Stage1Config, s2: Stage2Config, *,
                        target: Optional[float] = None,
                        tags: Optional[frozenset[str]] = None) -> DescentReport:
    """Stage 1 then stage 2 from the same x0.

    Stage 2 is skipped when the best in-ball point already meets ``target``,
    or when one alpha-step past the sphere along the stage-1 ray does not
    improve on the best in-ball point (the minimizer is within the ball).
    A skipped run reports the stage-1 point as ``best``; otherwise ``best``
    is the best march iterate.
    """
    x0 = as_point(s1.x0, obj.dimension)
    st1 = stage1_direction(obj, s1)
    f0 = evaluate(obj, x0)
    u = st1.d_star / s1.delta
    beyond = evaluate(obj, x0 + (s1.delta + s2.alpha) * u)

    skip = beyond >= st1.ball_best_value or (target is not None and st1.ball_best_value <= target)
    if skip:
        report = DescentReport(st1.d_star, [(0, x0, f0)], (x0, f0), st1.evaluations + 2)
        if st1.ball_best_value < f0:
            report.best = (st1.ball_best, st1.ball_best_value)
        report.skipped_stage2 = True
    else:
        report = stage2_march(obj, x0, st1.d_star, s2)
        report.evaluations += st1.evaluations + 1

    report.zero_progress = st1.zero_progress
    # average decrease per unit distance over the stage-1 ball; tiny means flat
    report.flatness = float((f0 - st1.value) / s1.delta) if math.isfinite(st1.value) else math.nan
    if report.flatness < 1e-6 * obj.lipschitz_k:
        report.warnings.append("flat: stage-1 decrease is negligible relative to K")
    if st1.zero_progress:
        report.warnings.append("zero-progress: stage 1 found no point better than x0")

    if tags is not None and not {"lsc", "unique-min"} <= set(tags):
        missing = sorted({"lsc", "unique-min"} - set(tags))
        report.warnings.append("preconditions unverified: " + ", ".join(missing))
    if obj.known_minimizer is None:
        report.warnings.append("bound unavailable: no known minimizer")
    elif np.linalg.norm(obj.known_minimizer - x0) > 0:
        report.bound = bound_check(obj, x0, st1.d_star, s2.alpha)
        if math.isinf(report.bound.lhs):
            # the Lipschitz chain needs f finite at x_{m*}
            report.warnings.append("bound point x_m* lies outside the domain")
    return report
