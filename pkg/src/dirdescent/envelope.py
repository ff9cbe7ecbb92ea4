"""Lower convex envelope on sample clouds, points of convexity and subgradient certificates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import INF, InputError, SampleCloud, as_point
from .hull_lp import (
    LpProblem,
    SolverStalledError,
    WeightedCombination,
    caratheodory_reduce,
    solve_lp,
)

DEFAULT_REL_TOL = 1e-7


class EnvelopeUnavailableError(RuntimeError):
    pass


class InvalidStartError(InputError):
    pass


@dataclass(frozen=True, eq=False)
class EnvelopeCertificate:
    query: NDArray[np.float64]
    value: float
    support: WeightedCombination
    support_values: NDArray[np.float64]
    support_indices: NDArray[np.int64]


@dataclass(frozen=True, eq=False)
class ConvexityMask:
    in_af: NDArray[np.bool_]
    gap: NDArray[np.float64]
    envelope: NDArray[np.float64]
    tol: float


@dataclass(frozen=True, eq=False)
class SubgradientCertificate:
    z: NDArray[np.float64]
    feasible: bool
    g: Optional[NDArray[np.float64]]
    gap: float
    tol: float

    @property
    def status(self) -> str:
        return "feasible" if self.feasible else "infeasible"


def default_tol(cloud: SampleCloud) -> float:
    """Convexity tolerance: 1e-7 times the cloud's value range (1e-7 for a constant cloud)."""
    spread = float(np.ptp(cloud.values))
    return DEFAULT_REL_TOL * (spread if spread > 0 else 1.0)


def lce_value(cloud: SampleCloud, x: ArrayLike) -> EnvelopeCertificate:
    """Envelope value at ``x``: min sum lam_k f_k over simplex weights with barycenter x."""
    q = as_point(x, cloud.dim)
    m = len(cloud)
    A = np.vstack([cloud.points.T, np.ones((1, m))])
    b = np.concatenate([q, [1.0]])
    try:
        sol = solve_lp(LpProblem(cloud.values, A, b))
    except SolverStalledError as exc:
        raise EnvelopeUnavailableError(str(exc)) from exc
    if sol.status == "infeasible":
        return EnvelopeCertificate(q, INF, WeightedCombination.empty(cloud.dim),
                                   np.zeros(0), np.zeros(0, dtype=np.int64))
    if sol.status != "optimal":
        raise EnvelopeUnavailableError(f"unexpected LP status {sol.status}")

    lam = sol.x
    idx = np.flatnonzero(lam > 1e-14)
    w = lam[idx] / lam[idx].sum()
    comb, sub = caratheodory_reduce(WeightedCombination(cloud.points[idx], w),
                                    cloud.values[idx], return_indices=True)
    support_idx = idx[sub]
    vals = cloud.values[support_idx]
    return EnvelopeCertificate(q, float(comb.weights @ vals), comb, vals, support_idx)


def lce_values(cloud: SampleCloud, queries: ArrayLike) -> NDArray[np.float64]:
    qs = np.asarray(queries, dtype=float).reshape(-1, cloud.dim)
    return np.array([lce_value(cloud, q).value for q in qs])


def convexity_set(cloud: SampleCloud, tol: Optional[float] = None) -> ConvexityMask:
    """Flag the cloud points where f equals its envelope (within ``tol``)."""
    if tol is None:
        tol = default_tol(cloud)
    if not tol > 0:
        raise InputError("tolerance must be positive")
    env = lce_values(cloud, cloud.points)
    gap = cloud.values - env
    return ConvexityMask(gap <= tol, gap, env, float(tol))


def convexity_radius(cloud: SampleCloud, x0: ArrayLike, tol: Optional[float] = None,
                     mask: Optional[ConvexityMask] = None) -> float:
    """Largest sampled radius around x0 whose cloud points are all points of convexity.

    Measured on the cloud: the farthest flagged point that is still strictly
    closer than the nearest non-flagged one.
    """
    p = as_point(x0, cloud.dim)
    dist = np.linalg.norm(cloud.points - p, axis=1)
    i0 = int(np.argmin(dist))
    if dist[i0] > 1e-12:
        raise InvalidStartError("x0 must be a cloud point")
    if mask is None:
        mask = convexity_set(cloud, tol)
    if not mask.in_af[i0]:
        raise InvalidStartError("x0 is not a point of convexity")
    bad = dist[~mask.in_af]
    limit = bad.min() if bad.size else INF
    inside = dist[mask.in_af & (dist < limit)]
    return float(inside.max())


def subgradient_certificate(cloud: SampleCloud, z: ArrayLike,
                            tol: Optional[float] = None) -> SubgradientCertificate:
    """Look for g with f_i >= f(z) + g.(x_i - z) for all cloud points.

    Solves the Chebyshev LP  min t  s.t.  f(z) + g.(x_i - z) - f_i <= t,
    t >= 0, with g split into positive and negative parts. By LP duality the
    optimum equals max(0, f(z) - envelope(z)). A second LP with t held at its
    optimum picks the certificate of smallest l1 norm, so g is reproducible.
    """
    q = as_point(z, cloud.dim)
    if tol is None:
        tol = default_tol(cloud)
    dist = np.linalg.norm(cloud.points - q, axis=1)
    iz = int(np.argmin(dist))
    if dist[iz] > 1e-12:
        raise InputError("z must be a cloud point")
    fz = cloud.values[iz]
    D = cloud.points - q
    m, n = D.shape
    # variables: g+ (n), g- (n), t, slack (m)
    A = np.hstack([D, -D, -np.ones((m, 1)), np.eye(m)])
    b = cloud.values - fz
    c = np.zeros(2 * n + 1 + m)
    c[2 * n] = 1.0
    try:
        sol = solve_lp(LpProblem(c, A, b))
    except SolverStalledError as exc:
        raise EnvelopeUnavailableError(str(exc)) from exc
    if sol.status != "optimal":
        raise EnvelopeUnavailableError(f"unexpected LP status {sol.status}")
    gap = max(0.0, float(sol.x[2 * n]))
    # variables: g+ (n), g- (n), slack (m)
    A2 = np.hstack([D, -D, np.eye(m)])
    c2 = np.concatenate([np.ones(2 * n), np.zeros(m)])
    try:
        sol2 = solve_lp(LpProblem(c2, A2, b + gap))
    except SolverStalledError as exc:
        raise EnvelopeUnavailableError(str(exc)) from exc
    x = sol2.x if sol2.status == "optimal" else sol.x
    g = x[:n] - x[n:2 * n]
    return SubgradientCertificate(q, gap <= tol, g, gap, float(tol))


def hull_boundary_mask(cloud: SampleCloud, eps: float = 1e-9) -> NDArray[np.bool_]:
    """Cloud points on the boundary of the cloud's convex hull."""
    pts = cloud.points
    if cloud.dim == 1:
        x = pts[:, 0]
        return (x <= x.min() + eps) | (x >= x.max() - eps)
    from scipy.spatial import ConvexHull

    try:
        hull = ConvexHull(pts)
    except Exception:  # flat clouds: every point is on the (relative) boundary
        return np.ones(len(cloud), dtype=bool)
    slack = pts @ hull.equations[:, :-1].T + hull.equations[:, -1]
    return np.any(slack >= -eps, axis=1)


def hull_vertex_mask(cloud: SampleCloud) -> NDArray[np.bool_]:
    """Extreme points of the cloud's convex hull."""
    pts = cloud.points
    out = np.zeros(len(cloud), dtype=bool)
    if cloud.dim == 1:
        out[np.argmin(pts[:, 0])] = True
        out[np.argmax(pts[:, 0])] = True
        return out
    from scipy.spatial import ConvexHull

    out[ConvexHull(pts).vertices] = True
    return out
