import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontweave.exact import InvalidTimeError
from frontweave.grid import INF, GridSpec, SurfacePoint
from frontweave.reference import (
    CFLError,
    EmptyRegionError,
    NearestIndex,
    OracleCloud,
    aggregate,
    contour_points,
    error_method1,
    error_method2,
    lsm_solve,
    lsm_steps,
    loglog_slope,
    tag_region,
)
from frontweave.registry import ex1_R, get_example
from frontweave.speed import SpeedField, constant


def _circle_grid(n=160, lo=-0.5, hi=0.5, T=0.1):
    g = GridSpec.square(lo, hi, n, T)
    X, Y = np.meshgrid(g.xs, g.ys, indexing="ij")
    return g, np.hypot(X, Y) - 0.25


def _radius_error(phi, g, R):
    c = contour_points(phi, g, 0.0)
    return float(np.max(np.abs(np.hypot(c[:, 0], c[:, 1]) - R)))


def test_lsm_unit_speed_radius():
    g, phi0 = _circle_grid()
    phi = lsm_solve(constant(1.0), phi0, g, 0.1, 0.25 * g.h)[-1][1]
    assert _radius_error(phi, g, 0.35) <= 2 * g.h**2 * 10


def test_lsm_second_order_on_ex1():
    ex = get_example("ex1")
    errs = []
    for n in (80, 160):
        g, phi0 = _circle_grid(n, T=0.1)
        dt = 0.25 * g.h / 1.0
        t, phi = lsm_solve(ex.F, phi0, g, 0.1, dt)[-1]
        assert t == 0.1
        errs.append(_radius_error(phi, g, float(ex1_R(0.1))))
    assert errs[1] <= 1e-4
    assert errs[1] < errs[0] / 2.5


def test_lsm_zero_speed_is_static():
    g, phi0 = _circle_grid(40)
    for _, phi in lsm_steps(constant(0.0), phi0, g, 0.1, 0.01):
        assert np.array_equal(phi, phi0)


def test_lsm_cfl_violation():
    g, phi0 = _circle_grid(40)
    with pytest.raises(CFLError):
        lsm_solve(constant(1.0), phi0, g, 0.1, g.h)


def test_lsm_keep_every_keeps_last():
    g, phi0 = _circle_grid(20)
    out = lsm_solve(constant(1.0), phi0, g, 0.1, 0.01, keep_every=3)
    assert out[0][0] == 0.0 and out[-1][0] == 0.1


def test_contour_linear_field():
    g = GridSpec(-1.0, -1.0, 1.0, 3, 1.0)
    X, _ = np.meshgrid(g.xs, g.ys, indexing="ij")
    c = contour_points(X, g, 0.3)
    assert len(c) == 3 and np.all(c[:, 0] == 0.0) and np.all(c[:, 2] == 0.3)


def test_contour_circle_and_empty():
    g, phi = _circle_grid(200)
    c = contour_points(phi - 0.1, g, 0.0)
    assert np.max(np.abs(np.hypot(c[:, 0], c[:, 1]) - 0.35)) <= g.h**2 * 4
    assert contour_points(np.ones((5, 5)), GridSpec(0, 0, 1, 5, 1), 0).shape == (0, 3)


def test_method1():
    ex = get_example("ex1")
    on = SurfacePoint(0, 0, float(ex1_R(0.05)), 0.0, 0.05)
    assert error_method1(on, ex.exact) <= 1e-15
    p = SurfacePoint(0, 0, 0.3, 0.0, 0.05)
    assert math.isclose(error_method1(p, ex.exact), abs(0.3 - float(ex1_R(0.05))))
    assert math.isnan(error_method1(SurfacePoint(0, 0, 0.3, 0.0, INF), ex.exact))
    with pytest.raises(InvalidTimeError):
        error_method1(SurfacePoint(0, 0, 0.3, 0.0, 0.29), ex.exact)
    with pytest.raises(ValueError):
        error_method1(p, get_example("almond").exact)


def test_method2_examples():
    B = OracleCloud([(0.1, 0, 0), (0, 0.2, 0)])
    assert error_method2((0.1, 0.0, 0.0), B) == 0
    assert math.isclose(error_method2(SurfacePoint(0, 0, 0.0, 0.0, 0.0), B), 0.1)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 400), st.integers(0, 10_000), st.floats(0.01, 2.0))
def test_index_equals_scan(k, seed, cell):
    rng = np.random.default_rng(seed)
    pts = rng.random((k, 3))
    idx = NearestIndex(pts, cell=cell)
    for q in rng.uniform(-0.5, 1.5, (20, 3)):
        assert idx.query(q) == idx.brute(q)


def test_index_empty_cloud():
    with pytest.raises(ValueError):
        NearestIndex(np.empty((0, 3)))


def test_aggregate_examples():
    L1, Linf, rel = aggregate([0.5], "bottom", 2, 0.1)
    assert math.isclose(L1, 0.005) and Linf == 0.5
    _, Linf, rel = aggregate([1.0, 2.0], "global", 2, 0.1)
    assert Linf == 2 and rel == [0.5, 1.0]
    L1, _, _ = aggregate([1.0, 2.0], "sideways", None, 0.1)
    assert math.isclose(L1, 0.3)
    with pytest.raises(EmptyRegionError):
        aggregate([], "top", 2, 0.1)
    with pytest.raises(ValueError):
        aggregate([1.0], "middle", 2, 0.1)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 10), min_size=1, max_size=30), st.floats(0, 10))
def test_aggregate_l1_monotone(errs, extra):
    a = aggregate(errs, "global", 2, 0.1)[0]
    b = aggregate(errs + [extra], "global", 2, 0.1)[0]
    assert b >= a


def test_tag_region():
    assert tag_region(SurfacePoint(0, 0, 0, 0, 0.05, source="tfmm"), 0.1) == "bottom"
    assert tag_region(SurfacePoint(0, 0, 0, 0, 0.15, source="tfmm"), 0.1) == "top"
    assert tag_region(SurfacePoint(0, 0, 0, 0, 0.05, source="sideways-yt"), 0.1) == "sideways"


def test_loglog_slope():
    hs = [0.1, 0.05, 0.025]
    assert math.isclose(loglog_slope(hs, [h**2 for h in hs]), 2.0)
    assert math.isnan(loglog_slope([0.1], [1.0]))
