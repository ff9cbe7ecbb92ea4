"""1-D lower convex hull, a dense two-phase simplex solver and Caratheodory reduction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import DUPLICATE_TOL, INF, InputError, SampleCloud

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-8
SLOPE_TOL = 1e-12


class SolverStalledError(RuntimeError):
    """Simplex hit its iteration cap without reaching a verdict."""


# --------------------------------------------------------------------------
# lower hull in 1-D


def lower_hull_1d(cloud: SampleCloud) -> list[tuple[float, float]]:
    """Vertices of the lower convex hull of the graph points (x_k, f_k).

    Monotone chain over points sorted by x. Samples sharing an x keep the
    lower value. Consecutive slopes are strictly increasing (beyond 1e-12).
    """
    if cloud.dim != 1:
        raise InputError("lower_hull_1d needs a 1-D cloud")
    order = np.lexsort((cloud.values, cloud.points[:, 0]))
    xs = cloud.points[order, 0]
    fs = cloud.values[order]

    pts: list[tuple[float, float]] = []
    for x, f in zip(xs, fs):
        if pts and x - pts[-1][0] < DUPLICATE_TOL:
            continue  # sorted by value within equal x, so the first one is the lowest
        pts.append((float(x), float(f)))

    hull: list[tuple[float, float]] = []
    for p in pts:
        while len(hull) >= 2:
            (x0, f0), (x1, f1) = hull[-2], hull[-1]
            s_prev = (f1 - f0) / (x1 - x0)
            s_new = (p[1] - f1) / (p[0] - x1)
            if s_new <= s_prev + SLOPE_TOL:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def hull_interpolate(vertices: list[tuple[float, float]], x: float) -> float:
    """Piecewise-linear interpolant through hull vertices; +inf outside their span."""
    xs = np.array([v[0] for v in vertices])
    fs = np.array([v[1] for v in vertices])
    if x < xs[0] - 1e-9 or x > xs[-1] + 1e-9:
        return INF
    return float(np.interp(x, xs, fs))


# --------------------------------------------------------------------------
# simplex


@dataclass(frozen=True, eq=False)
class LpProblem:
    """minimize c.x  subject to  A x = b,  x >= 0."""

    c: NDArray[np.float64]
    A: NDArray[np.float64]
    b: NDArray[np.float64]

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape != (b.size, c.size):
            raise InputError(f"LP shape mismatch: A {A.shape}, b {b.size}, c {c.size}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise InputError("LP data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    value: float
    x: Optional[NDArray[np.float64]]
    iterations: int = 0


def _pivot(T: NDArray, r: int, j: int) -> None:
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _simplex(T: NDArray, basis: list[int], ncols: int, cap: int, it: int) -> tuple[str, int]:
    """Bland's-rule primal simplex on tableau T (last row reduced costs, last column rhs)."""
    m = T.shape[0] - 1
    while True:
        reduced = T[m, :ncols]
        candidates = np.flatnonzero(reduced < -PIVOT_TOL)
        if candidates.size == 0:
            return "optimal", it
        j = int(candidates[0])
        col = T[:m, j]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return "unbounded", it
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, r, j)
        basis[r] = j
        it += 1
        if it > cap:
            raise SolverStalledError(f"simplex exceeded {cap} pivots")


def solve_lp(problem: LpProblem) -> LpSolution:
    """Dense two-phase primal simplex with Bland's rule.

    Phase 1 minimizes the sum of artificials; rows whose artificial cannot be
    pivoted out are redundant and dropped before phase 2.
    """
    c, A, b = problem.c, problem.A.copy(), problem.b.copy()
    m, n = A.shape
    cap = 50 * (n + m)

    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = list(range(n, n + m))

    _, it = _simplex(T, basis, n + m, cap, 0)
    infeas = -T[m, -1]
    if infeas > FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
        return LpSolution("infeasible", INF, None, it)

    keep = []
    for r in range(m):
        if basis[r] >= n:
            nz = np.flatnonzero(np.abs(T[r, :n]) > PIVOT_TOL)
            if nz.size:
                _pivot(T, r, int(nz[0]))
                basis[r] = int(nz[0])
                keep.append(r)
        else:
            keep.append(r)

    T2 = np.zeros((len(keep) + 1, n + 1))
    T2[:-1, :n] = T[keep, :n]
    T2[:-1, -1] = T[keep, -1]
    basis2 = [basis[r] for r in keep]
    T2[-1, :n] = c
    for r, j in enumerate(basis2):
        T2[-1] -= c[j] * T2[r]

    status, it = _simplex(T2, basis2, n, cap, it)
    if status == "unbounded":
        return LpSolution("unbounded", -INF, None, it)

    x = np.zeros(n)
    for r, j in enumerate(basis2):
        x[j] = T2[r, -1]
    x[np.abs(x) < 1e-13] = 0.0
    x = np.maximum(x, 0.0)
    return LpSolution("optimal", float(c @ x), x, it)


# --------------------------------------------------------------------------
# Caratheodory


@dataclass(frozen=True, eq=False)
class WeightedCombination:
    points: NDArray[np.float64]
    weights: NDArray[np.float64]

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if pts.shape[0] != w.size:
            raise InputError("points and weights differ in length")
        if np.any(w < -1e-12) or (w.size and abs(w.sum() - 1.0) > 1e-10):
            raise InputError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def barycenter(self) -> NDArray[np.float64]:
        return self.weights @ self.points

    def __len__(self) -> int:
        return self.weights.size

    @classmethod
    def empty(cls, dim: int) -> "WeightedCombination":
        return cls(np.zeros((0, dim)), np.zeros(0))


def _affine_dependence(P: NDArray) -> NDArray:
    """Nonzero mu with sum mu_k p_k = 0 and sum mu_k = 0, for k = n+2 points.

    Row-reduce [P^T; 1] (partial pivoting) and read mu off the first free column.
    """
    k, n = P.shape
    M = np.vstack([P.T, np.ones((1, k))])
    rows, cols = M.shape
    pivots = []
    r = 0
    for j in range(cols):
        if r == rows:
            break
        i = r + int(np.argmax(np.abs(M[r:, j])))
        if abs(M[i, j]) <= 1e-12 * max(1.0, np.abs(M).max()):
            continue
        M[[r, i]] = M[[i, r]]
        M[r] /= M[r, j]
        for q in range(rows):
            if q != r:
                M[q] -= M[q, j] * M[r]
        pivots.append(j)
        r += 1
    free = next(j for j in range(cols) if j not in pivots)
    mu = np.zeros(cols)
    mu[free] = 1.0
    for row, pj in enumerate(pivots):
        mu[pj] = -M[row, free]
    return mu


def caratheodory_reduce(c: WeightedCombination, values: Optional[ArrayLike] = None,
                        return_indices: bool = False):
    """Rewrite a convex combination using at most n+1 points, same barycenter.

    Repeatedly takes an affine dependence mu among the first n+2 support
    points and moves the weights along -mu until one hits zero (ratio-test
    ties go to the lowest index). When ``values`` are given the sign of mu is
    chosen so sum w_k * values_k does not increase.
    """
    n = c.points.shape[1]
    vals = None if values is None else np.asarray(values, dtype=float).reshape(-1)
    idx = np.flatnonzero(c.weights > 0)
    w = c.weights[idx].astype(float)
    P = c.points[idx]

    while w.size > n + 1:
        k = n + 2
        mu = _affine_dependence(P[:k])
        if vals is not None and mu @ vals[idx[:k]] < 0:
            mu = -mu
        pos = np.flatnonzero(mu > 1e-14)
        ratios = w[pos] / mu[pos]
        t = ratios.min()
        drop = int(pos[np.flatnonzero(ratios <= t * (1 + 1e-12))[0]])
        w[:k] = w[:k] - t * mu
        w[drop] = 0.0
        keep = w > 1e-15
        w, P, idx = w[keep], P[keep], idx[keep]

    w = w / w.sum()
    out = WeightedCombination(P, w)
    return (out, idx) if return_indices else out
