"""Closed-form level-set functions for the registered examples."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .grid import INF, unit


class InvalidTimeError(ValueError):
    """The closed form does not hold at the requested time."""


@dataclass(frozen=True)
class ExactSolution:
    name: str
    phi: Callable  # (x, y, t) -> value, numpy-broadcasting
    signed_distance: bool = True
    valid_t: tuple = (0.0, INF)
    solves_lse: bool = True
    grad: Callable | None = None  # optional analytic (phi_x, phi_y, phi_t)

    def check_time(self, t: float) -> None:
        lo, hi = self.valid_t
        if not lo <= t <= hi:
            raise InvalidTimeError(f"{self.name}: exact solution not valid at t={t}")

    def gradient(self, x: float, y: float, t: float, eps: float = 1e-6) -> tuple:
        if self.grad is not None:
            return tuple(float(c) for c in self.grad(x, y, t))
        phi = self.phi
        tm = max(t - eps, 0.0)
        return (
            float(phi(x + eps, y, t) - phi(x - eps, y, t)) / (2 * eps),
            float(phi(x, y + eps, t) - phi(x, y - eps, t)) / (2 * eps),
            float(phi(x, y, t + eps) - phi(x, y, tm)) / (t + eps - tm),
        )

    def normal(self, x: float, y: float, t: float) -> tuple:
        return unit(self.gradient(x, y, t))


def first_root(f: Callable, lo: float, hi: float, steps: int = 2000) -> float:
    """Smallest root of ``f`` on [lo, hi] found by scanning then bisection."""
    from scipy.optimize import brentq

    xs = [lo + (hi - lo) * k / steps for k in range(steps + 1)]
    prev = f(xs[0])
    if prev == 0:
        return xs[0]
    for a, b in zip(xs, xs[1:]):
        cur = f(b)
        if prev * cur <= 0:
            return brentq(f, a, b, xtol=1e-15)
        prev = cur
    return math.nan
