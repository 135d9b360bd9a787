"""Monotone upwind solver for the sideways representations.

A sideways patch describes the front locally as w = chi(z, t) in rotated
coordinates (w, z): theta = 0 gives x = chi(y, t), theta = pi/2 gives
y = chi(-x, t), any other angle a skewed version.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .grid import INF
from .speed import SpeedField

REPS = ("yt", "xt", "skew")


class StabilityError(ValueError):
    pass


def upw(chi_row, l: int, h: float, alpha: float) -> float:
    """Upwind squared slope at index ``l`` of ``chi_row``."""
    dp = (chi_row[l + 1] - chi_row[l]) / h
    dm = (chi_row[l] - chi_row[l - 1]) / h
    return kernels.upw(dm, dp, alpha)


def skew_map(x, y, theta: float):
    c, s = math.cos(theta), math.sin(theta)
    return x * c + y * s, -x * s + y * c


def skew_unmap(w, z, theta: float):
    c, s = math.cos(theta), math.sin(theta)
    return w * c - z * s, w * s + z * c


def rep_angle(rep: str, theta: float = 0.0) -> float:
    if rep == "yt":
        return 0.0
    if rep == "xt":
        return math.pi / 2
    if rep == "skew":
        return theta
    raise ValueError(f"unknown representation {rep!r}")


def cfl_dt(P: float, M: float, K: float, delta: float, h: float, cap: float = INF) -> float:
    """Largest admissible step: 0.9 times the smallest stability bound, capped."""
    if not P > 2:
        raise StabilityError(f"slope bound P must exceed 2, got {P}")
    b1 = h / (2 * P * M) if M > 0 else INF
    b2 = (P - 2) / (K * P * math.sqrt(1 + 2 * P * P)) if K > 0 else INF
    b3 = 2 / (P * delta) if delta > 0 else INF
    return min(0.9 * min(b1, b2, b3), cap)


@dataclass
class SidewaysPatch:
    rep: str
    a: int
    z_vals: np.ndarray
    t0: float
    h: float
    theta: float = 0.0
    s: int = 0
    chi: list = field(default_factory=list)  # rows of chi, each an array over z_vals
    times: list = field(default_factory=list)
    dt_schedule: list = field(default_factory=list)
    data: dict = field(default_factory=dict)  # row index -> array of boundary values (nan = none)
    anchor_l: int = 0
    anchor_row: int = 0

    def __post_init__(self):
        if self.rep not in REPS:
            raise ValueError(f"unknown representation {self.rep!r}")
        if self.a not in (-1, 1):
            raise ValueError(f"orientation sign must be +-1, got {self.a}")
        self.theta = rep_angle(self.rep, self.theta)
        self.z_vals = np.asarray(self.z_vals, dtype=float)
        if not self.times:
            self.times = [self.t0]

    @property
    def rows(self) -> int:
        return len(self.chi)

    def row_array(self) -> np.ndarray:
        return np.array(self.chi)

    def points(self, r: int):
        """(x, y, t) arrays of the finite entries of row ``r`` and their indices."""
        row = self.chi[r]
        idx = np.nonzero(np.isfinite(row))[0]
        x, y = skew_unmap(row[idx], self.z_vals[idx], self.theta)
        return x, y, np.full(idx.shape, self.times[r]), idx

    def exhausted(self) -> bool:
        return bool(self.chi) and not np.isfinite(self.chi[-1]).any()


def sideways_step(patch: SidewaysPatch, F: SpeedField, r: int, dt: float) -> np.ndarray:
    """Row r+1 from row r; entries without two finite neighbours become +inf."""
    row = np.asarray(patch.chi[r], dtype=float)
    fvals = np.zeros_like(row)
    x, y, t, idx = patch.points(r)
    if idx.size:
        fvals[idx] = F.many(x, y, t)
    return kernels.sideways_row(row, fvals, patch.a, patch.h, dt)


def row_slope_bound(row: np.ndarray, h: float) -> float:
    """Max finite one-sided slope, clamped to [3, 2/h]."""
    ok = np.isfinite(row[1:]) & np.isfinite(row[:-1])
    d = (row[1:][ok] - row[:-1][ok]) / h
    p = float(np.max(np.abs(d))) if d.size else 0.0
    return min(max(p, 3.0), max(2.0 / h, 3.0 + 1e-9))


def truncate_row(row: np.ndarray, anchor: int, h: float, cap: float) -> np.ndarray:
    """Keep the contiguous run around ``anchor`` whose slopes stay below ``cap``."""
    out = np.full_like(row, INF)
    n = row.shape[0]
    if not np.isfinite(row[anchor]):
        finite = np.nonzero(np.isfinite(row))[0]
        if finite.size == 0:
            return out
        anchor = int(finite[np.argmin(np.abs(finite - anchor))])
    lo = hi = anchor
    while lo > 0 and np.isfinite(row[lo - 1]) and abs(row[lo] - row[lo - 1]) <= cap * h:
        lo -= 1
    while hi < n - 1 and np.isfinite(row[hi + 1]) and abs(row[hi + 1] - row[hi]) <= cap * h:
        hi += 1
    out[lo : hi + 1] = row[lo : hi + 1]
    return out


@dataclass
class DtPolicy:
    """Step-size rule: r1*h before the local sign change of aF, r2*h after.

    Both are capped by the stability bound. ``fixed`` bypasses everything.
    """

    r1: float = 1.0
    r2: float = 1.0
    delta: float = 0.1
    slope_cap: float | None = None
    fixed: float | None = None
    use_cfl: bool = True
    _sign0: int = 0
    _flipped: bool = False

    @classmethod
    def constant(cls, dt: float) -> "DtPolicy":
        return cls(fixed=dt, use_cfl=False)

    def reset(self) -> None:
        self._sign0 = 0
        self._flipped = False

    def _anchor_sign(self, patch: SidewaysPatch, F: SpeedField, r: int) -> int:
        row = patch.chi[r]
        finite = np.nonzero(np.isfinite(row))[0]
        if finite.size == 0:
            return 0
        l = int(finite[np.argmin(np.abs(finite - patch.anchor_l))])
        x, y = skew_unmap(row[l], patch.z_vals[l], patch.theta)
        f = F(x, y, patch.times[r])
        return int(patch.a * f > 0) - int(patch.a * f < 0)

    def stability_limit(self, patch: SidewaysPatch, F: SpeedField, r: int) -> float:
        h = patch.h
        row = patch.chi[r]
        P = row_slope_bound(row, h)
        x, y, t, idx = patch.points(r)
        if idx.size == 0:
            return INF
        pts = np.stack([x, y, t], axis=1)
        M = max(F.local_bound(p, 2 * h) for p in pts[:: max(1, len(pts) // 8)])
        M = max(M, F.local_bound(pts[np.argmin(np.abs(idx - patch.anchor_l))], 2 * h))
        k = F.local_lipschitz(pts[np.argmin(np.abs(idx - patch.anchor_l))], 2 * h)
        return cfl_dt(P, M, k, self.delta, h)

    def __call__(self, patch: SidewaysPatch, F: SpeedField, r: int) -> float:
        if self.fixed is not None:
            return self.fixed
        if self._sign0 == 0:
            self._sign0 = self._anchor_sign(patch, F, 0) or self._anchor_sign(patch, F, r)
        sign = self._anchor_sign(patch, F, r)
        if sign != 0 and self._sign0 != 0 and sign != self._sign0:
            self._flipped = True
        base = (self.r2 if self._flipped else self.r1) * patch.h
        if not self.use_cfl:
            return base
        return min(base, self.stability_limit(patch, F, r))


def solve_patch(
    patch: SidewaysPatch,
    F: SpeedField,
    R_max: int | None = None,
    dt_policy: DtPolicy | None = None,
    stop=None,
) -> SidewaysPatch:
    """March the patch forward row by row.

    Boundary data stored in ``patch.data`` override computed values where
    present. ``stop(patch)`` is called after every new row and ends the
    march when it returns true. Rows before ``patch.anchor_row`` use the
    step already fixed by their stored times.
    """
    if not patch.chi:
        raise ValueError("patch has no initial row")
    if R_max is None:
        R_max = 3 * max(patch.s, 1)
    policy = dt_policy if dt_policy is not None else DtPolicy()
    cap = policy.slope_cap
    r = patch.rows - 1
    while r < R_max:
        saved = patch.chi[r]
        if cap is not None:
            # slopes steeper than the cap leave the graph regime; drop them
            patch.chi[r] = truncate_row(saved, patch.anchor_l, patch.h, cap)
        try:
            if r + 1 < len(patch.times):
                dt = patch.times[r + 1] - patch.times[r]
            else:
                dt = policy(patch, F, r)
            new = sideways_step(patch, F, r, dt)
        finally:
            patch.chi[r] = saved
        bd = patch.data.get(r + 1)
        if bd is not None:
            has = ~np.isnan(bd)
            new[has] = bd[has]
        patch.chi.append(new)
        if r + 1 >= len(patch.times):
            patch.times.append(patch.times[r] + dt)
        patch.dt_schedule.append(dt)
        r += 1
        if stop is not None and stop(patch):
            break
        if not np.isfinite(new).any() and not any(k > r for k in patch.data):
            break
    return patch
