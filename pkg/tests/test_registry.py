import math

import numpy as np
import pytest

from frontweave.exact import InvalidTimeError
from frontweave.registry import (
    NAMES,
    UnknownExampleError,
    almond_phi,
    ex1_R,
    ex4_R,
    exact_phi,
    get_example,
    motivation_collapse,
    motivation_R,
)


def test_names_and_unknown():
    for name in ("motivation", "ex1", "ex2", "ex3", "ex4", "almond"):
        assert name in NAMES
        assert get_example(name).name == name
    with pytest.raises(UnknownExampleError):
        get_example("ex9")


def test_verbatim_parameters():
    ex1 = get_example("ex1")
    assert (ex1.lo, ex1.hi, ex1.T_F, ex1.r1, ex1.r2) == (-0.321, 0.319, 0.3, 1 / 3, 2.0)
    ex2 = get_example("ex2")
    assert (ex2.lo, ex2.hi, ex2.T_F) == (-1.01, 0.99, 1.0)
    assert get_example("ex4").T_F == 1.2
    alm = get_example("almond")
    assert (alm.lo, alm.hi, alm.T_F) == (-0.5, 0.5, 1.9)


def test_speed_examples():
    assert get_example("ex1").F(0.2, 0.1, 0.1) == 0.0
    # near t = 0 the speed stays within g(0) = pi/2 - arctan(5) of c = 1/2
    F3 = get_example("ex3").F
    g0 = math.pi / 2 - math.atan(5.0)
    rng = np.random.default_rng(0)
    for x, y in rng.uniform(-1, 1, (200, 2)):
        assert abs(F3(x, y, 1e-6) - 0.5) <= g0 + 1e-4
    assert math.isclose(get_example("ex2").F(0.3, 0.0, 0.5), 0.3)
    assert math.isclose(get_example("motivation").F(0, 0, 0.25), 0.5)


def test_ex3_guard_at_centre():
    F = get_example("ex3").F
    assert F(0.0, 0.0, 0.0) == 0.5
    assert F.many(np.zeros(2), np.zeros(2), np.zeros(2)).tolist() == [0.5, 0.5]


def test_ex4_touch_time():
    t = get_example("ex4").notes["touch_time"]
    assert math.isclose(t, 0.08, abs_tol=0.005)
    assert math.isclose(float(ex4_R(t)), 0.3, abs_tol=1e-12)


def test_exact_phi_examples():
    assert math.isclose(exact_phi("ex1", 0.3, 0, 0), 0.05)
    assert math.isclose(exact_phi("ex4", 0.3, 0, 0), -0.25)
    assert math.isclose(exact_phi("ex4", -0.3, 0, 0), -0.25)
    for t in (0.1, 0.5, 1.0):
        r = 0.25 + t - t * t
        assert abs(exact_phi("motivation", r, 0.0, t)) < 1e-14
    with pytest.raises(InvalidTimeError):
        exact_phi("ex4", 0.0, 0.0, 0.6)


def test_motivation_collapse():
    T = motivation_collapse()
    assert math.isclose(T, (1 + math.sqrt(2)) / 2)
    assert abs(float(motivation_R(T))) < 1e-12


@pytest.mark.parametrize("name", ["ex1", "ex2", "ex3", "ex4", "motivation"])
def test_unit_gradient(name):
    ex = get_example(name)
    rng = np.random.default_rng(1)
    lo_t, hi_t = ex.exact.valid_t
    hi_t = min(hi_t, ex.T_F)
    eps = 1e-6
    for _ in range(1000):
        x, y = rng.uniform(ex.lo, ex.hi, 2)
        t = rng.uniform(lo_t, hi_t)
        phi = ex.exact.phi
        gx = (phi(x + eps, y, t) - phi(x - eps, y, t)) / (2 * eps)
        gy = (phi(x, y + eps, t) - phi(x, y - eps, t)) / (2 * eps)
        if name == "ex4" and abs(abs(x) - 0.0) < 1e-3:
            continue  # the union of two distance cones has a ridge on x = 0
        if math.hypot(x - (0.25 * math.sinh(t) if name == "ex2" else 0), y) < 1e-3:
            continue
        assert abs(math.hypot(gx, gy) - 1) <= 1e-6


@pytest.mark.parametrize("name, R", [("ex1", ex1_R), ("ex4", ex4_R)])
def test_radius_rate_is_minus_speed(name, R):
    ex = get_example(name)
    ts = np.linspace(0.0, ex.T_F, 1000)
    e = 1e-6
    d = (R(ts + e) - R(ts - e)) / (2 * e)
    f = np.array([ex.F(0.0, 0.0, t) for t in ts])
    assert np.max(np.abs(d - f)) < 1e-6


def test_almond_continuous_across_seam():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        x, t = rng.uniform(-0.5, 0.5), rng.uniform(0, 1.9)
        y = x * t
        a = almond_phi(x, y - 1e-9, t)
        b = almond_phi(x, y + 1e-9, t)
        assert abs(a - b) < 1e-8


def test_almond_wide_shares_data():
    a, b = get_example("almond"), get_example("almond-wide")
    assert b.T_F == a.T_F and b.hi - b.lo > 2.5
    assert math.isclose(a.notes["reversal_time"], 1 + math.log(1.65))
