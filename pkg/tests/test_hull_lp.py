import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dirdescent.core import InputError, SampleCloud
from dirdescent.hull_lp import (
    LpProblem,
    WeightedCombination,
    caratheodory_reduce,
    hull_interpolate,
    lower_hull_1d,
    solve_lp,
)
from dirdescent.testfns import get_function

from conftest import vertex_enumeration


def segment_oracle(xs, fs):
    """Hull vertices by definition: a sample is a vertex unless it lies on or above
    some chord between a sample to its left and one to its right."""
    keep = []
    for k in range(len(xs)):
        above = False
        for i in range(len(xs)):
            for j in range(len(xs)):
                if xs[i] < xs[k] < xs[j]:
                    t = (xs[k] - xs[i]) / (xs[j] - xs[i])
                    if (1 - t) * fs[i] + t * fs[j] <= fs[k] + 1e-12:
                        above = True
        if not above:
            keep.append((xs[k], fs[k]))
    return keep


def test_hull_square_keeps_all_points():
    x = [-1, -0.5, 0, 0.5, 1]
    hull = lower_hull_1d(SampleCloud(x, [v * v for v in x]))
    assert [v[0] for v in hull] == x


def test_hull_w_function(w_vertices):
    # (0, 0.5) sits above the chord from (-0.5, 0.2) to (0.5, 0), which is 0.1 at 0
    assert 0.5 * 0.2 + 0.5 * 0.0 == pytest.approx(0.1)
    assert lower_hull_1d(w_vertices) == [(-1.0, 0.8), (-0.5, 0.2), (0.5, 0.0), (1.0, 0.9)]


def test_hull_truncated_counterexample():
    cloud = get_function("unbounded_counterexample_truncated", R=5).cloud(0.1)
    xs, fs = cloud.points[:, 0], cloud.values
    expected = segment_oracle(list(xs), list(fs))
    assert expected == [(-5.0, 1.0), (0.0, 0.0), (5.0, 1.0)]
    assert lower_hull_1d(cloud) == expected


def test_hull_single_point():
    assert lower_hull_1d(SampleCloud([0.3], [2.0])) == [(0.3, 2.0)]


def test_hull_needs_1d():
    with pytest.raises(InputError):
        lower_hull_1d(SampleCloud([[0, 0], [1, 1]], [0, 0]))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_hull_properties(seed):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 15))
    x = np.sort(rng.choice(np.arange(-50, 50), size=m, replace=False)) / 10.0
    f = rng.uniform(-1, 1, size=m)
    cloud = SampleCloud(x, f)
    hull = lower_hull_1d(cloud)
    hx = [v[0] for v in hull]
    assert hx == sorted(hx)
    slopes = np.diff([v[1] for v in hull]) / np.diff(hx) if len(hull) > 1 else []
    assert np.all(np.diff(slopes) > 1e-12)
    for xi, fi in zip(x, f):
        assert hull_interpolate(hull, xi) <= fi + 1e-12
    again = lower_hull_1d(SampleCloud(hx, [v[1] for v in hull]))
    assert again == hull


def test_lp_simplex_vertex():
    sol = solve_lp(LpProblem([5.0, 1.0], [[1.0, 1.0]], [1.0]))
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(1.0)
    np.testing.assert_allclose(sol.x, [0.0, 1.0])


def test_lp_infeasible():
    assert solve_lp(LpProblem([1.0], [[0.0]], [1.0])).status == "infeasible"


def test_lp_unbounded():
    # minimize -x1 with x1 - x2 = 0
    assert solve_lp(LpProblem([-1.0, 0.0], [[1.0, -1.0]], [0.0])).status == "unbounded"


def test_lp_lsc_cloud_envelope_at_quarter():
    h = 0.01
    cloud = get_function("lsc_counterexample").cloud(h)
    x, f = cloud.points[:, 0], cloud.values
    # brute force over all sample pairs straddling 0.25
    brute = min((1 - (0.25 - x[i]) / (x[j] - x[i])) * f[i] + (0.25 - x[i]) / (x[j] - x[i]) * f[j]
                for i in range(len(x)) for j in range(len(x)) if x[i] <= 0.25 <= x[j] and i != j)
    assert brute == pytest.approx(0.0049020, abs=1e-7)
    A = np.vstack([x, np.ones_like(x)])
    sol = solve_lp(LpProblem(f, A, [0.25, 1.0]))
    assert sol.value == pytest.approx(brute, abs=1e-10)


def test_lp_redundant_rows():
    A = [[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]]
    sol = solve_lp(LpProblem([3.0, 1.0, 2.0], A, [1.0, 2.0]))
    assert sol.status == "optimal" and sol.value == pytest.approx(1.0)


def test_lp_agrees_with_vertex_enumeration():
    rng = np.random.default_rng(2024)
    checked = 0
    for _ in range(300):
        n = int(rng.integers(1, 7))
        m = int(rng.integers(1, 4))
        A = rng.integers(-3, 4, size=(m, n)).astype(float)
        x_feas = rng.uniform(0, 1, size=n) * (rng.uniform(size=n) < 0.7)
        b = A @ x_feas if rng.uniform() < 0.8 else rng.integers(-3, 4, size=m).astype(float)
        # nonnegative costs keep every instance bounded
        c = rng.uniform(0, 2, size=n)
        sol = solve_lp(LpProblem(c, A, b))
        ref = vertex_enumeration(A, b, c)
        if np.isinf(ref):
            assert sol.status == "infeasible"
        else:
            assert sol.status == "optimal"
            assert sol.value == pytest.approx(ref, abs=1e-8)
            assert np.abs(A @ sol.x - b).max() <= 1e-8
            assert sol.x.min() >= -1e-10
            checked += 1
    assert checked > 100


def test_lp_shape_check():
    with pytest.raises(InputError):
        LpProblem([1.0, 2.0], [[1.0]], [1.0])


def test_caratheodory_identity_drops_zero_weights():
    c = WeightedCombination([[0.0], [1.0], [2.0]], [0.5, 0.0, 0.5])
    out = caratheodory_reduce(c)
    np.testing.assert_array_equal(out.points, [[0.0], [2.0]])
    np.testing.assert_allclose(out.weights, [0.5, 0.5])


def test_caratheodory_1d():
    c = WeightedCombination([[-1.0], [0.5], [1.0]], [0.4, 0.4, 0.2])
    assert -0.4 + 0.2 + 0.2 == pytest.approx(0.0)
    out = caratheodory_reduce(c)
    assert len(out) <= 2
    assert np.all(out.weights > 0)
    assert abs(out.barycenter[0]) <= 1e-9


def test_caratheodory_square_corners():
    c = WeightedCombination([[1, 1], [1, -1], [-1, 1], [-1, -1]], [0.25] * 4)
    out = caratheodory_reduce(c)
    assert len(out) <= 3
    assert np.linalg.norm(out.barycenter) <= 1e-9


def test_caratheodory_does_not_raise_value():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(1, 4))
        k = int(rng.integers(n + 2, 13))
        pts = rng.normal(size=(k, n))
        w = rng.dirichlet(np.ones(k))
        vals = rng.normal(size=k)
        out, idx = caratheodory_reduce(WeightedCombination(pts, w), vals, return_indices=True)
        assert len(out) <= n + 1
        assert out.weights @ vals[idx] <= w @ vals + 1e-12
        assert np.linalg.norm(out.barycenter - w @ pts) <= 1e-9


def test_weighted_combination_validation():
    with pytest.raises(InputError):
        WeightedCombination([[0.0], [1.0]], [0.7, 0.7])
    with pytest.raises(InputError):
        WeightedCombination([[0.0], [1.0]], [1.5, -0.5])
