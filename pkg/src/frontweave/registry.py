"""Named example configurations: speed, initial curve, domain and exact solution."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import EngineConfig, InitialFront
from .exact import ExactSolution, InvalidTimeError, first_root
from .grid import INF, GridSpec
from .speed import SpeedField

E = math.e
R0 = 0.25


def _exp(v: float) -> float:
    # speeds may be probed far past T on long sign-test segments
    return math.exp(min(v, 700.0))


class UnknownExampleError(KeyError):
    pass


@dataclass(frozen=True)
class ExampleSpec:
    name: str
    F: SpeedField
    initial: InitialFront
    lo: float
    hi: float
    T_F: float
    r1: float
    r2: float
    r1_skew: float
    r2_skew: float
    exact: ExactSolution | None = None
    exact_normals: bool = True
    exact_normals_until: float = INF
    sideways_conv_domain: tuple | None = None  # (axis, (z_lo, z_hi), (t_lo, t_hi))
    notes: dict = field(default_factory=dict)

    def grid(self, intervals: int) -> GridSpec:
        return GridSpec.square(self.lo, self.hi, intervals, self.T_F)

    def config(self, intervals: int, **overrides) -> EngineConfig:
        kw = dict(
            r1=self.r1,
            r2=self.r2,
            r1_skew=self.r1_skew,
            r2_skew=self.r2_skew,
            exact_normals=self.exact_normals,
            exact_normals_until=self.exact_normals_until,
        )
        kw.update(overrides)
        return EngineConfig(grid=self.grid(intervals), **kw)


def _circle(cx=0.0, cy=0.0, r=R0):
    return lambda x, y: np.hypot(np.asarray(x) - cx, np.asarray(y) - cy) - r


# -- expanding then collapsing circle ------------------------------------
def ex1_R(t):
    return R0 - (np.exp(10 * t) - 1) / (10 * E) + t


def _ex1() -> ExampleSpec:
    fn = lambda x, y, t: 1.0 - np.exp(10 * np.asarray(t) - 1) + 0 * np.asarray(x)
    F = SpeedField(fn, K=10 * math.exp(10 * 0.3 - 1), scalar=lambda x, y, t: 1.0 - _exp(10 * t - 1))
    collapse = first_root(lambda t: float(ex1_R(t)), 0.1, 0.3)
    phi = lambda x, y, t: np.hypot(x, y) - ex1_R(t)
    exact = ExactSolution("ex1", phi, valid_t=(0.0, collapse))
    return ExampleSpec(
        "ex1", F, InitialFront(_circle(), exact), -0.321, 0.319, 0.3,
        1 / 3, 2.0, 1.0, 1.0, exact, exact_normals=False,
        sideways_conv_domain=("y", (-0.25, 0.25), (0.0, 0.3)),
        notes={"collapse_time": collapse, "turning_time": 0.1},
    )


# -- circle drifting right, speed x -------------------------------------
def _ex2() -> ExampleSpec:
    F = SpeedField(lambda x, y, t: np.asarray(x, dtype=float) + 0 * np.asarray(y) + 0 * np.asarray(t),
                   K=1.0, time_dependent=False, scalar=lambda x, y, t: x)

    def phi(x, y, t):
        return np.hypot(x - R0 * np.sinh(t), y) - R0 * np.cosh(t)

    exact = ExactSolution("ex2", phi, solves_lse=False)
    return ExampleSpec(
        "ex2", F, InitialFront(_circle(), exact), -1.01, 0.99, 1.0,
        1 / 3, 2.0, 1 / 3, 5.0, exact,
        sideways_conv_domain=("y", (-0.25, 0.25), (0.0, 1.0)),
    )


# -- circle that starts moving right around t = 0.5 -----------------------
EX3_B = 10.0
EX3_C = 0.5


def ex3_g(t):
    return np.arctan(EX3_B * (t - 0.5)) + np.pi / 2


def ex3_gprime(t):
    return EX3_B / (1 + (EX3_B * (t - 0.5)) ** 2)


def _ex3_speed(x, y, t):
    x, y, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(t, float))
    g = ex3_g(t)
    dx = x - g * t
    r2 = dx * dx + y * y
    safe = np.where(r2 < 1e-24, 1.0, r2)
    out = dx * (ex3_gprime(t) * t + g) / np.sqrt(safe) + EX3_C
    out = np.where(r2 < 1e-24, EX3_C, out)
    return out if out.ndim else float(out)


def _ex3_scalar(x, y, t):
    g = math.atan(EX3_B * (t - 0.5)) + math.pi / 2
    dx = x - g * t
    r2 = dx * dx + y * y
    if r2 < 1e-24:
        return EX3_C
    return dx * (EX3_B / (1 + (EX3_B * (t - 0.5)) ** 2) * t + g) / math.sqrt(r2) + EX3_C


def _ex3() -> ExampleSpec:
    # |grad F| peaks near the centre; the local estimate is what the solver uses
    F = SpeedField(_ex3_speed, K=60.0, scalar=_ex3_scalar)
    phi = lambda x, y, t: np.hypot(x - ex3_g(t) * t, y) - (R0 + EX3_C * t)
    exact = ExactSolution("ex3", phi)
    return ExampleSpec(
        "ex3", F, InitialFront(_circle(), exact), -1.51, 1.49, 0.5,
        1 / 3, 2.0, 1 / 3, 5.0, exact,
        sideways_conv_domain=("y", (-0.25, 0.25), (0.0, 0.5)),
    )


# -- two circles that merge and later pinch apart --------------------------
def ex4_R(t):
    return R0 - (np.exp(2 * t) - 1) / (2 * E) + t


def _ex4() -> ExampleSpec:
    fn = lambda x, y, t: 1.0 - np.exp(2 * np.asarray(t) - 1) + 0 * np.asarray(x)
    F = SpeedField(fn, K=2 * math.exp(2 * 1.2 - 1), scalar=lambda x, y, t: 1.0 - _exp(2 * t - 1))

    def phi0(x, y):
        return np.minimum(np.hypot(x + 0.3, y), np.hypot(x - 0.3, y)) - R0

    def phi(x, y, t):
        return np.minimum(np.hypot(x + 0.3, y), np.hypot(x - 0.3, y)) - ex4_R(t)

    exact = ExactSolution("ex4", phi, valid_t=(0.0, 0.5 - 1e-12))
    lo = -1.5 + 0.01 * E
    touch = first_root(lambda t: float(ex4_R(t)) - 0.3, 0.0, 0.5)
    return ExampleSpec(
        "ex4", F, InitialFront(phi0, exact), lo, lo + 3.0, 1.2,
        1 / 3, 2.0, 1 / 3, 5.0, exact, exact_normals_until=0.5,
        sideways_conv_domain=("y", (-0.5, 0.5), (0.2, 0.5)),
        notes={"touch_time": touch},
    )


# -- almond: a shock forms when the motion reverses -------------------------
ALMOND_C_SMALL = 1.0
ALMOND_C = 0.65


def almond_phi(x, y, t):
    x, y, t = np.asarray(x, float), np.asarray(y, float), np.asarray(t, float)
    c = ALMOND_C_SMALL
    base = np.hypot(x, y) - R0 + (np.exp(c * t) - 1) / (c * E) - t * (1 + ALMOND_C)
    return base + t * np.abs(x * t - y) / np.sqrt(1 + t * t)


def almond_grad(x, y, t):
    x, y, t = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(t, float))
    c = ALMOND_C_SMALL
    r = np.hypot(x, y)
    r = np.where(r == 0, 1e-300, r)
    u = x * t - y
    su = np.sign(u)
    q = np.sqrt(1 + t * t)
    gx = x / r + t * su * t / q
    gy = y / r - t * su / q
    gt = np.exp(c * t) / E - (1 + ALMOND_C) + np.abs(u) / q**3 + t * x * su / q
    return gx, gy, gt


def _almond_speed(x, y, t):
    gx, gy, gt = almond_grad(x, y, t)
    g = np.hypot(gx, gy)
    # the spatial gradient vanishes only at the origin on the seam; no front passes there
    out = np.where(g > 0, -gt / np.where(g > 0, g, 1.0), 0.0)
    return out if np.ndim(out) else float(out)


def _almond(name="almond", lo=-0.5, hi=0.5) -> ExampleSpec:
    F = SpeedField(_almond_speed, K=10.0)
    exact = ExactSolution("almond", almond_phi, signed_distance=False, grad=almond_grad)
    # the radial part of phi_t changes sign when e^(c t - 1) = 1 + C
    reversal = (1 + math.log(1 + ALMOND_C)) / ALMOND_C_SMALL
    return ExampleSpec(
        name, F, InitialFront(_circle(), exact), lo, hi, 1.9,
        1 / 3, 2.0, 1 / 2, 6.0, exact,
        notes={"reversal_time": reversal},
    )


def _almond_wide() -> ExampleSpec:
    # same data on a box large enough to hold the front until it turns back
    return _almond("almond-wide", -1.51, 1.49)


# -- motivation: F = 1 - c t on a circle ------------------------------------
MOTIVATION_C = 2.0


def motivation_R(t):
    return R0 + t - MOTIVATION_C * np.asarray(t) ** 2 / 2


def motivation_collapse() -> float:
    c = MOTIVATION_C
    return (1 + math.sqrt(1 + 2 * c * R0)) / c


def _motivation() -> ExampleSpec:
    c = MOTIVATION_C
    fn = lambda x, y, t: 1.0 - c * np.asarray(t) + 0 * np.asarray(x)
    F = SpeedField(fn, K=c, scalar=lambda x, y, t: 1.0 - c * t)
    collapse = motivation_collapse()
    phi = lambda x, y, t: np.hypot(x, y) - motivation_R(t)
    exact = ExactSolution("motivation", phi, valid_t=(0.0, collapse))
    return ExampleSpec(
        "motivation", F, InitialFront(_circle(), exact), -0.601, 0.599, 1.3,
        1 / 3, 2.0, 1 / 3, 5.0, exact,
        notes={"collapse_time": collapse},
    )


# -- constant unit speed (classical reduction check) ---------------------------
def _unit() -> ExampleSpec:
    F = SpeedField(lambda x, y, t: np.ones(np.broadcast(x, y, t).shape) if np.ndim(x) else 1.0,
                   K=0.0, time_dependent=False, scalar=lambda x, y, t: 1.0)
    exact = ExactSolution("unit", lambda x, y, t: np.hypot(x, y) - (R0 + t))
    return ExampleSpec(
        "unit", F, InitialFront(_circle(), exact), -0.321, 0.319, 1.0,
        1 / 3, 2.0, 1.0, 1.0, exact, exact_normals=False,
    )


_BUILDERS = {
    "motivation": _motivation,
    "ex1": _ex1,
    "ex2": _ex2,
    "ex3": _ex3,
    "ex4": _ex4,
    "almond": _almond,
    "almond-wide": _almond_wide,
    "unit": _unit,
}

NAMES = tuple(_BUILDERS)


def get_example(name: str) -> ExampleSpec:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise UnknownExampleError(f"unknown example {name!r}; choose from {', '.join(NAMES)}") from None


def exact_phi(name: str, x, y, t):
    spec = get_example(name)
    if spec.exact is None:
        raise InvalidTimeError(f"{name} has no closed-form solution")
    spec.exact.check_time(t)
    return spec.exact.phi(x, y, t)
