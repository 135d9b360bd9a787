import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontweave import _pykernels, kernels
from frontweave.sideways import (
    DtPolicy,
    SidewaysPatch,
    StabilityError,
    cfl_dt,
    sideways_step,
    skew_map,
    skew_unmap,
    solve_patch,
    upw,
)
from frontweave.speed import constant


def test_upw_examples():
    h = 0.1
    assert upw([0.3, 0.3, 0.3], 1, h, 1) == 0 == upw([0.3, 0.3, 0.3], 1, h, -1)
    v = [0.1, 0.0, 0.1]
    assert upw(v, 1, h, 1) == 0.0
    assert math.isclose(upw(v, 1, h, -1), 2.0)


def test_upw_monotone_rows_pick_one_side():
    # away from extrema each switch keeps exactly one one-sided slope
    row = [0.0, 0.1, 0.25]
    assert math.isclose(upw(row, 1, 0.1, 1), 1.0)
    assert math.isclose(upw(row, 1, 0.1, -1), 1.5**2)
    down = row[::-1]  # D- = -1.5, D+ = -1
    assert math.isclose(upw(down, 1, 0.1, 1), 1.0)
    assert math.isclose(upw(down, 1, 0.1, -1), 1.5**2)


def test_step_zero_speed_keeps_row():
    p = SidewaysPatch("yt", -1, np.linspace(0, 1, 6), 0.0, 0.2, chi=[np.linspace(0.1, 0.6, 6)])
    new = sideways_step(p, constant(0.0), 0, 0.05)
    assert np.array_equal(new[1:-1], p.chi[0][1:-1])


def test_step_flat_row():
    p = SidewaysPatch("yt", -1, np.linspace(0, 1, 6), 0.0, 0.2, chi=[np.full(6, 0.5)])
    new = sideways_step(p, constant(1.0), 0, 0.01)
    assert np.allclose(new[1:-1], 0.51)
    assert np.isinf(new[0]) and np.isinf(new[-1])


def test_step_inf_neighbour_propagates():
    row = np.full(6, 0.5)
    row[3] = np.inf
    p = SidewaysPatch("yt", -1, np.linspace(0, 1, 6), 0.0, 0.2, chi=[row])
    new = sideways_step(p, constant(1.0), 0, 0.01)
    assert np.isinf(new[2]) and np.isinf(new[4])


def test_cfl_examples():
    want = 0.9 * min(5e-4, 8 / (10 * math.sqrt(201)), 2.0)
    assert math.isclose(cfl_dt(10, 1, 1, 0.1, 0.01), want)
    assert math.isclose(want, 4.5e-4)
    b2 = 1 / (3 * math.sqrt(19))
    assert math.isclose(cfl_dt(3, 1, 1, 1, 0.1), 0.9 * min(0.1 / 6, b2, 2 / 3))
    assert math.isclose(cfl_dt(10, 0, 1, 0.1, 0.01), 0.9 * min(8 / (10 * math.sqrt(201)), 2.0))
    with pytest.raises(StabilityError):
        cfl_dt(2, 1, 1, 0.1, 0.01)


def test_skew_limits():
    assert skew_map(0.3, -0.2, 0.0) == (0.3, -0.2)
    w, z = skew_map(0.3, -0.2, math.pi / 2)
    assert math.isclose(w, -0.2, abs_tol=1e-15) and math.isclose(z, -0.3, abs_tol=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-7, 7))
def test_skew_round_trip(x, y, th):
    xx, yy = skew_unmap(*skew_map(x, y, th), th)
    assert abs(xx - x) <= 1e-13 and abs(yy - y) <= 1e-13


def test_zero_speed_patch_rows_shrink():
    z = np.linspace(0, 1, 11)
    p = SidewaysPatch("yt", -1, z, 0.0, 0.1, chi=[np.full(11, 0.4)])
    solve_patch(p, constant(0.0), R_max=4, dt_policy=DtPolicy.constant(0.01))
    for r, row in enumerate(p.chi):
        inner = row[r : len(row) - r]
        assert np.all(inner == 0.4)


def test_patch_exhausts_without_boundary_data():
    s = 4
    z = np.linspace(0, 0.1 * 2 * s, 2 * s + 1)
    p = SidewaysPatch("yt", -1, z, 0.0, 0.1, s=s, chi=[np.full(2 * s + 1, 0.4)])
    solve_patch(p, constant(1.0), R_max=3 * s, dt_policy=DtPolicy.constant(0.01))
    assert p.exhausted()
    assert np.isfinite(p.chi[s]).any() and not np.isfinite(p.chi[s + 1]).any()


@settings(max_examples=300, deadline=None)
@given(
    st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.sampled_from([-1.0, 1.0]),
    st.floats(-3, 3), st.floats(1e-4, 0.05), st.floats(1e-3, 0.1),
)
def test_scheme_backends_agree(b, c, d, a, f, dt, h):
    assert kernels.scheme_g(b, c, d, a, f, dt, h) == _pykernels.scheme_g(b, c, d, a, f, dt, h)


def test_godunov_backends_agree():
    rng = np.random.default_rng(3)
    p = rng.random((30, 24))
    f = rng.random((26, 20)) - 0.5
    assert np.array_equal(kernels.godunov_norm(p, f, 0.05), _pykernels.godunov_norm(p, f, 0.05))
