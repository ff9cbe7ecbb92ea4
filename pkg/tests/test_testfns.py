import numpy as np
import pytest
from scipy.stats import special_ortho_group

from dirdescent.core import evaluate
from dirdescent.testfns import UnknownFunctionError, get_function, list_functions

REQUIRED = ["abs1d", "aniso_quadratic", "lsc_counterexample", "norm_radial", "plateau_flat",
            "sq_radial", "unbounded_counterexample_truncated", "w_piecewise"]


def test_list_contains_required_ids_in_order():
    ids = [fid for fid, _ in list_functions()]
    assert ids == sorted(ids)
    assert set(REQUIRED) <= set(ids)


def test_tags():
    tags = dict(list_functions())
    assert {"counterexample", "nonconvex"} <= tags["lsc_counterexample"]
    assert {"convex", "radial", "unique-min"} <= tags["sq_radial"]
    assert "unique-min" not in tags["plateau_flat"]


def test_lsc_counterexample_cloud():
    cloud = get_function("lsc_counterexample").cloud(0.01)
    x = cloud.points[:, 0]
    assert len(cloud) == 51
    assert x[0] == 0.0 and cloud.values[0] == 0.0
    np.testing.assert_allclose(x[1:], 0.5 + 0.01 * np.arange(1, 51), atol=1e-12)
    np.testing.assert_allclose(cloud.values[1:], 0.01 * np.arange(1, 51), atol=1e-12)
    obj = get_function("lsc_counterexample").objective
    assert evaluate(obj, [0.5]) == np.inf and evaluate(obj, [0.25]) == np.inf


def test_truncated_counterexample_values():
    obj = get_function("unbounded_counterexample_truncated", R=5, mesh=0.1).objective
    assert evaluate(obj, [0.5]) == 0.5
    assert evaluate(obj, [3.0]) == 1.0
    assert evaluate(obj, [6.0]) == np.inf


def test_w_piecewise_metadata():
    obj = get_function("w_piecewise").objective
    assert obj.lipschitz_k == pytest.approx(1.8)
    assert obj.known_minimizer[0] == 0.5 and obj.known_min_value == 0.0


def test_unknown_id():
    with pytest.raises(UnknownFunctionError):
        get_function("rosenbrock")


@pytest.mark.parametrize("fid", REQUIRED + ["random_pl", "radial_pl"])
def test_cloud_regenerates_bit_identically(fid):
    a, b = get_function(fid).cloud(), get_function(fid).cloud()
    assert a.points.tobytes() == b.points.tobytes()
    assert a.values.tobytes() == b.values.tobytes()


def test_unique_min_entries_have_strict_second_value():
    for fid, tags in list_functions():
        if "unique-min" in tags:
            vals = np.sort(get_function(fid).cloud().values)
            assert vals[1] - vals[0] > 1e-9, fid


@pytest.mark.parametrize("fid,params", [("norm_radial", {"n": 2}), ("norm_radial", {"n": 3}),
                                        ("sq_radial", {"n": 3, "c": [0.2, -0.1, 0.3]}),
                                        ("radial_pl", {"n": 2, "seed": 4})])
def test_radial_rotation_invariance(fid, params):
    obj = get_function(fid, **params).objective
    n, c = obj.dimension, obj.known_minimizer
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = c + rng.uniform(-1, 1, size=n)
        R = special_ortho_group.rvs(n, random_state=rng)
        assert evaluate(obj, c + R @ (x - c)) == pytest.approx(evaluate(obj, x), abs=1e-12)


def test_convex_tags_pass_midpoint_sampling():
    rng = np.random.default_rng(1)
    for fid, tags in list_functions():
        if "convex" not in tags:
            continue
        obj = get_function(fid).objective
        lo, hi = obj.domain.bounding_box()
        for _ in range(300):
            x, y = rng.uniform(lo, hi), rng.uniform(lo, hi)
            fx, fy, fm = evaluate(obj, x), evaluate(obj, y), evaluate(obj, (x + y) / 2)
            if np.isfinite(fx) and np.isfinite(fy):
                assert fm <= (fx + fy) / 2 + 1e-12, fid


def test_w_is_not_convex():
    obj = get_function("w_piecewise").objective
    assert evaluate(obj, [0.0]) > 0.5 * evaluate(obj, [-0.5]) + 0.5 * evaluate(obj, [0.5])
