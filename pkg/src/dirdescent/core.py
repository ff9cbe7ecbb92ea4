"""Extended reals, points, bounded domains, sample clouds and the objective contract."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

INF = math.inf
MEMBERSHIP_TOL = 1e-9
DUPLICATE_TOL = 1e-12

Vector = NDArray[np.float64]


class InputError(ValueError):
    """Malformed input: wrong dimension, non-finite coordinates, bad parameters."""


class UndefinedEstimateError(InputError):
    pass


def ext_real(value: float) -> float:
    """Validate a value of the extended real line (-inf, +inf].

    Floats already give the ordering and arithmetic we need (inf beats every
    finite value, lam * inf = inf for lam > 0); the only things to reject are
    NaN and -inf.
    """
    v = float(value)
    if math.isnan(v):
        raise InputError("NaN is not an extended real")
    if v == -INF:
        raise InputError("-inf is outside (-inf, +inf]")
    return v


def as_point(x: ArrayLike, dim: Optional[int] = None) -> Vector:
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.ndim != 1 or p.size == 0:
        raise InputError(f"point must be a non-empty vector, got shape {p.shape}")
    if dim is not None and p.size != dim:
        raise InputError(f"dimension mismatch: expected {dim}, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise InputError("point coordinates must be finite")
    return p


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def contains(self, t: float, tol: float) -> bool:
        above = t >= self.lo - tol if self.lo_closed else t > self.lo + tol
        below = t <= self.hi + tol if self.hi_closed else t < self.hi - tol
        return above and below


@dataclass(frozen=True, eq=False)
class Domain:
    """A bounded subset of R^n.

    ``kind`` is one of ``box``, ``ball``, ``hull`` (convex hull of a finite
    point set) or ``intervals`` (1-D finite union of possibly half-open
    intervals, needed for domains like {0} u (1/2, 1]).
    """

    kind: str
    dim: int
    lower: Optional[Vector] = None
    upper: Optional[Vector] = None
    center: Optional[Vector] = None
    radius: float = 0.0
    vertices: Optional[NDArray[np.float64]] = None
    intervals: tuple[Interval, ...] = ()
    tol: float = MEMBERSHIP_TOL

    @classmethod
    def box(cls, lower: ArrayLike, upper: ArrayLike, tol: float = MEMBERSHIP_TOL) -> "Domain":
        lo, hi = as_point(lower), as_point(upper)
        if lo.size != hi.size or np.any(lo > hi):
            raise InputError("box corners must have equal length and lower <= upper")
        return cls("box", lo.size, lower=lo, upper=hi, tol=tol)

    @classmethod
    def ball(cls, center: ArrayLike, radius: float, tol: float = MEMBERSHIP_TOL) -> "Domain":
        c = as_point(center)
        if not (radius >= 0 and math.isfinite(radius)):
            raise InputError("ball radius must be finite and >= 0")
        return cls("ball", c.size, center=c, radius=float(radius), tol=tol)

    @classmethod
    def hull(cls, points: ArrayLike, tol: float = MEMBERSHIP_TOL) -> "Domain":
        v = np.atleast_2d(np.asarray(points, dtype=float))
        if v.size == 0 or not np.all(np.isfinite(v)):
            raise InputError("hull needs a non-empty finite point set")
        return cls("hull", v.shape[1], vertices=v, tol=tol)

    @classmethod
    def union_of_intervals(cls, intervals: Sequence[Interval], tol: float = MEMBERSHIP_TOL) -> "Domain":
        if not intervals:
            raise InputError("need at least one interval")
        return cls("intervals", 1, intervals=tuple(intervals), tol=tol)

    def contains(self, x: ArrayLike) -> bool:
        p = as_point(x, self.dim)
        if self.kind == "box":
            return bool(np.all(p >= self.lower - self.tol) and np.all(p <= self.upper + self.tol))
        if self.kind == "ball":
            return float(np.linalg.norm(p - self.center)) <= self.radius + self.tol
        if self.kind == "intervals":
            return any(iv.contains(float(p[0]), self.tol) for iv in self.intervals)
        if self.dim == 1:
            return bool(self.vertices.min() - self.tol <= p[0] <= self.vertices.max() + self.tol)
        return _in_hull(self.vertices, p)

    def bounding_box(self) -> tuple[Vector, Vector]:
        if self.kind == "box":
            return self.lower.copy(), self.upper.copy()
        if self.kind == "ball":
            return self.center - self.radius, self.center + self.radius
        if self.kind == "intervals":
            return (np.array([min(iv.lo for iv in self.intervals)]),
                    np.array([max(iv.hi for iv in self.intervals)]))
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def enclosing_radius(self) -> float:
        """Radius of a ball around the bounding-box center that covers the domain."""
        if self.kind == "ball":
            return self.radius
        lo, hi = self.bounding_box()
        return 0.5 * float(np.linalg.norm(hi - lo))

    def diameter(self) -> float:
        if self.kind == "ball":
            return 2.0 * self.radius
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))

    def contains_ball(self, x0: ArrayLike, delta: float) -> bool:
        """True if the closed ball B(x0, delta) lies inside the domain."""
        p = as_point(x0, self.dim)
        if self.kind == "box":
            return bool(np.all(p - delta >= self.lower - self.tol)
                        and np.all(p + delta <= self.upper + self.tol))
        if self.kind == "ball":
            return float(np.linalg.norm(p - self.center)) + delta <= self.radius + self.tol
        if self.kind == "intervals":
            seg = (float(p[0]) - delta, float(p[0]) + delta)
            return any(iv.contains(seg[0], self.tol) and iv.contains(seg[1], self.tol)
                       for iv in self.intervals)
        if self.dim == 1:
            return (self.vertices.min() - self.tol <= p[0] - delta
                    and p[0] + delta <= self.vertices.max() + self.tol)
        from scipy.spatial import ConvexHull

        hull = ConvexHull(self.vertices)
        # facet equations are (unit normal, offset) with normal.x + offset <= 0 inside
        return bool(np.all(hull.equations[:, :-1] @ p + hull.equations[:, -1] <= -delta + self.tol))


def _in_hull(vertices: NDArray[np.float64], p: Vector) -> bool:
    from .hull_lp import LpProblem, solve_lp

    m = vertices.shape[0]
    A = np.vstack([vertices.T, np.ones((1, m))])
    b = np.concatenate([p, [1.0]])
    return solve_lp(LpProblem(np.zeros(m), A, b)).status == "optimal"


@dataclass(frozen=True, eq=False)
class Objective:
    """A function R^n -> (-inf, +inf] with compact domain and Lipschitz constant.

    ``func`` is only ever called on in-domain points; ``evaluate`` supplies
    the +inf outside.
    """

    dimension: int
    func: Callable[[Vector], float]
    domain: Domain
    lipschitz_k: float
    known_minimizer: Optional[Vector] = None
    known_min_value: Optional[float] = None
    subgradient_hint: Optional[Callable[[Vector], Vector]] = None
    name: str = "objective"

    def __post_init__(self):
        if self.dimension < 1 or self.domain.dim != self.dimension:
            raise InputError("objective and domain dimensions disagree")
        if not (self.lipschitz_k > 0 and math.isfinite(self.lipschitz_k)):
            raise InputError("lipschitz_k must be a positive finite real")
        if self.known_minimizer is not None:
            object.__setattr__(self, "known_minimizer", as_point(self.known_minimizer, self.dimension))
            if self.known_min_value is None:
                object.__setattr__(self, "known_min_value", float(self.func(self.known_minimizer)))

    def __call__(self, x: ArrayLike) -> float:
        return evaluate(self, x)


def evaluate(obj: Objective, x: ArrayLike) -> float:
    p = as_point(x, obj.dimension)
    if not obj.domain.contains(p):
        return INF
    return ext_real(obj.func(p))


@dataclass(frozen=True, eq=False)
class SampleCloud:
    """Finite set of distinct points with finite function values."""

    points: NDArray[np.float64]
    values: NDArray[np.float64]

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise InputError("cloud needs at least one point")
        if pts.shape[0] != vals.size:
            raise InputError("points and values differ in length")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(vals))):
            raise InputError("cloud points and values must be finite")
        if pts.shape[0] > 1 and cKDTree(pts).query_pairs(DUPLICATE_TOL):
            raise InputError("cloud contains duplicate points (distance < 1e-12)")
        pts.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    @classmethod
    def from_objective(cls, obj: Objective, points: ArrayLike) -> "SampleCloud":
        """Sample ``obj`` at ``points``, keeping only the in-domain ones."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != obj.dimension and pts.shape[0] == obj.dimension == 1:
            pts = pts.T
        keep, vals = [], []
        for p in pts:
            v = evaluate(obj, p)
            if v < INF:
                keep.append(p)
                vals.append(v)
        return cls(np.array(keep).reshape(-1, obj.dimension), np.array(vals))

    def subset(self, mask: ArrayLike) -> "SampleCloud":
        mask = np.asarray(mask)
        return SampleCloud(self.points[mask], self.values[mask])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(self.dim)] + ["f"])
        for p, v in zip(self.points, self.values):
            w.writerow([format(c, ".17g") for c in p] + [format(v, ".17g")])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SampleCloud":
        rows = list(csv.reader(io.StringIO(text)))
        rows = [r for r in rows if r and not r[0].startswith("#")]
        if not rows:
            raise InputError("empty cloud CSV")
        header = [h.strip() for h in rows[0]]
        n = len(header) - 1
        if n < 1 or header != [f"x{i + 1}" for i in range(n)] + ["f"]:
            raise InputError(f"cloud CSV header must be x1,...,xn,f; got {','.join(header)}")
        try:
            data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
        except ValueError as exc:
            raise InputError(f"bad number in cloud CSV: {exc}") from None
        if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != n + 1:
            raise InputError("cloud CSV rows must have n+1 columns")
        return cls(data[:, :n], data[:, n])

    @classmethod
    def read_csv(cls, path: str | Path) -> "SampleCloud":
        return cls.from_csv(Path(path).read_text(encoding="utf-8"))


def empirical_lipschitz(cloud: SampleCloud) -> float:
    """Largest pairwise slope |f_i - f_j| / |x_i - x_j| over the cloud."""
    if len(cloud) < 2:
        raise UndefinedEstimateError("Lipschitz estimate needs at least two points")
    dist = pdist(cloud.points)
    dval = pdist(cloud.values[:, None])
    return float(np.max(dval / dist))


def cloud_objective(cloud: SampleCloud, name: str = "cloud") -> Objective:
    """Objective backed by a sample cloud.

    Sample points return their stored value exactly; other points inside the
    hull get the piecewise-linear interpolant (Delaunay for n >= 2).
    """
    pts, vals = cloud.points, cloud.values
    tree = cKDTree(pts)
    if cloud.dim == 1:
        order = np.argsort(pts[:, 0])
        xs, fs = pts[order, 0], vals[order]

        def interp(p):
            return float(np.interp(p[0], xs, fs))
    else:
        from scipy.interpolate import LinearNDInterpolator

        lin = LinearNDInterpolator(pts, vals)

        def interp(p):
            v = float(lin(p[None, :])[0])
            if math.isnan(v):
                # on the hull boundary within tolerance but outside the triangulation
                _, j = tree.query(p)
                v = float(vals[j])
            return v

    def func(p):
        dist, j = tree.query(p)
        if dist < DUPLICATE_TOL:
            return float(vals[j])
        return interp(p)

    k = empirical_lipschitz(cloud) if len(cloud) > 1 else 1.0
    return Objective(cloud.dim, func, Domain.hull(pts), max(k, 1e-300), name=name)


def grid_points(lower: ArrayLike, upper: ArrayLike, mesh: float) -> NDArray[np.float64]:
    """Regular grid over a box, coordinates rounded to 12 decimals so decimal meshes land exactly."""
    lo, hi = as_point(lower), as_point(upper)
    axes = []
    for a, b in zip(lo, hi):
        count = int(math.floor((b - a) / mesh + 1e-9))
        axes.append(np.round(a + mesh * np.arange(count + 1), 12))
    mesh_grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.reshape(-1) for g in mesh_grid], axis=1)
