import math

import numpy as np
import pytest

from dirdescent.core import InputError, SampleCloud, grid_points
from dirdescent.envelope import (
    InvalidStartError,
    convexity_radius,
    convexity_set,
    hull_vertex_mask,
    lce_value,
    subgradient_certificate,
)
from dirdescent.hull_lp import hull_interpolate, lower_hull_1d
from dirdescent.testfns import get_function

from conftest import random_cloud


def test_lce_convex_samples(square_cloud):
    cert = lce_value(square_cloud, [0.5])
    assert cert.value == pytest.approx(0.25, abs=1e-12)
    assert len(cert.support) == 1
    assert cert.support.points[0, 0] == 0.5 and cert.support.weights[0] == pytest.approx(1.0)


def test_lce_lsc_counterexample_quarter():
    h = 0.01
    cert = lce_value(get_function("lsc_counterexample").cloud(h), [0.25])
    assert cert.value == pytest.approx(0.25 * h / (0.5 + h), abs=1e-10)
    assert 0.25 * h / (0.5 + h) == pytest.approx(0.0049020, abs=1e-7)
    assert sorted(cert.support.points[:, 0]) == pytest.approx([0.0, 0.51])


def test_lce_truncated_counterexample():
    cloud = get_function("unbounded_counterexample_truncated", R=5).cloud(0.1)
    hull = lower_hull_1d(cloud)
    assert hull_interpolate(hull, 0.5) == pytest.approx(0.1)
    assert lce_value(cloud, [0.5]).value == pytest.approx(0.1, abs=1e-10)


def test_lce_outside_hull_is_infinite(w_vertices):
    cert = lce_value(w_vertices, [1.5])
    assert cert.value == math.inf
    assert len(cert.support) == 0


def test_certificate_invariants():
    rng = np.random.default_rng(3)
    for _ in range(50):
        cloud = random_cloud(rng, 2, 15)
        q = rng.uniform(-1, 1, size=2)
        cert = lce_value(cloud, q)
        if math.isinf(cert.value):
            continue
        assert len(cert.support) <= 3
        assert np.linalg.norm(cert.support.barycenter - q) <= 1e-8
        assert cert.support.weights @ cert.support_values == pytest.approx(cert.value, abs=1e-8)


def test_envelope_dominance_and_1d_agreement():
    rng = np.random.default_rng(11)
    for _ in range(20):
        x = np.sort(rng.choice(np.arange(-100, 101), size=12, replace=False)) / 50
        cloud = SampleCloud(x, rng.normal(size=12))
        hull = lower_hull_1d(cloud)
        for xi, fi in zip(x, cloud.values):
            v = lce_value(cloud, [xi]).value
            assert v <= fi + 1e-8
            assert v == pytest.approx(hull_interpolate(hull, xi), abs=1e-8)


def test_envelope_midpoint_convexity():
    rng = np.random.default_rng(17)
    cloud = random_cloud(rng, 2, 20)
    done = 0
    while done < 500:
        x, y = rng.uniform(-1, 1, size=(2, 2))
        vx, vy = lce_value(cloud, x).value, lce_value(cloud, y).value
        if math.isinf(vx) or math.isinf(vy):
            continue
        assert lce_value(cloud, (x + y) / 2).value <= (vx + vy) / 2 + 1e-7
        done += 1


def test_convexity_set_convex_cloud(square_cloud):
    assert convexity_set(square_cloud, 1e-9).in_af.all()


def test_convexity_set_w_dense():
    cloud = get_function("w_piecewise").cloud(0.05)
    mask = convexity_set(cloud)
    x = cloud.points[:, 0]
    expected = (x <= -0.5 + 1e-12) | (x >= 0.5 - 1e-12)
    np.testing.assert_array_equal(mask.in_af, expected)
    assert mask.gap.min() >= -1e-8
    np.testing.assert_array_equal(mask.in_af, mask.gap <= mask.tol)


def test_convexity_set_rejects_bad_tol(w_vertices):
    with pytest.raises(InputError):
        convexity_set(w_vertices, 0.0)


def test_extreme_points_always_flagged():
    rng = np.random.default_rng(23)
    for n in (1, 2):
        for _ in range(10):
            cloud = random_cloud(rng, n, 15)
            mask = convexity_set(cloud)
            assert mask.in_af[hull_vertex_mask(cloud)].all()


def test_points_of_convexity_span_the_cloud():
    from scipy.optimize import linprog

    rng = np.random.default_rng(29)
    cloud = random_cloud(rng, 2, 20)
    mask = convexity_set(cloud)
    sub = cloud.points[mask.in_af]
    for p in cloud.points:
        res = linprog(np.zeros(len(sub)), A_eq=np.vstack([sub.T, np.ones(len(sub))]),
                      b_eq=np.append(p, 1.0), bounds=(0, None))
        assert res.status == 0


def test_convexity_radius_w():
    cloud = get_function("w_piecewise").cloud(0.05)
    assert convexity_radius(cloud, [0.75]) == pytest.approx(0.25, abs=1e-12)
    with pytest.raises(InvalidStartError):
        convexity_radius(cloud, [0.0])


def test_convexity_radius_convex_cloud():
    x = grid_points([-1], [1], 0.1)
    cloud = SampleCloud(x, x[:, 0] ** 2)
    assert convexity_radius(cloud, [0.3]) == pytest.approx(1.3, abs=1e-12)


def test_convexity_radius_needs_cloud_point(w_vertices):
    with pytest.raises(InvalidStartError):
        convexity_radius(w_vertices, [0.1])


def test_subgradient_square_at_minimizer(square_cloud):
    cert = subgradient_certificate(square_cloud, [0.0])
    assert cert.feasible and cert.g[0] == pytest.approx(0.0, abs=1e-12)


def test_subgradient_w_at_zero(w_vertices):
    # minimize over g of max(-0.3 - g, 0.3 - 0.5 g, 0.5 + 0.5 g, g - 0.4, 0)
    gs = np.linspace(-3, 3, 600001)
    worst = np.max([-0.3 - gs, 0.3 - 0.5 * gs, 0.5 + 0.5 * gs, gs - 0.4, 0 * gs], axis=0)
    assert worst.min() == pytest.approx(0.4, abs=1e-5)
    cert = subgradient_certificate(w_vertices, [0.0])
    assert not cert.feasible
    assert cert.gap == pytest.approx(0.4, abs=1e-8)


def test_subgradient_w_at_minus_half(w_vertices):
    cert = subgradient_certificate(w_vertices, [-0.5])
    assert cert.feasible
    g = float(cert.g[0])
    assert -1.2 - 1e-9 <= g <= -0.2 + 1e-9
    for x, f in zip(w_vertices.points[:, 0], w_vertices.values):
        assert f >= g * (x + 0.5) + 0.2 - 1e-8
    # the hand-picked certificate also works
    for x, f in zip(w_vertices.points[:, 0], w_vertices.values):
        assert f >= -0.5 * (x + 0.5) + 0.2


def test_subgradient_needs_cloud_point(w_vertices):
    with pytest.raises(InputError):
        subgradient_certificate(w_vertices, [0.1])


def test_subgradient_gap_equals_convexity_gap():
    rng = np.random.default_rng(31)
    cloud = random_cloud(rng, 2, 12)
    mask = convexity_set(cloud)
    for k, p in enumerate(cloud.points):
        cert = subgradient_certificate(cloud, p)
        assert cert.gap == pytest.approx(max(0.0, mask.gap[k]), abs=1e-8)
