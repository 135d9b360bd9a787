"""Main marching loop with sideways rescues near vanishing speed."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import eikonal
from .eikonal import MIN_SPEED, ZeroSpeedError
from .grid import INF, GridSpec, MarchState, SurfacePoint, nb_extract_min, unit
from .sideways import DtPolicy, cfl_dt, rep_angle, skew_map, solve_patch
from .speed import SpeedField
from .weaving import (
    InsufficientDataError,
    RefineError,
    convert_to_sideways,
    extract_crossing,
    sign_test,
)

OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1))

log = logging.getLogger(__name__)


class CurveOffGridError(ValueError):
    """The initial curve does not meet the grid."""


@dataclass
class EngineConfig:
    grid: GridSpec
    s_fraction: float = 1.0 / 3.0
    r1: float = 1.0 / 3.0
    r2: float = 2.0
    r1_skew: float = 1.0
    r2_skew: float = 1.0
    sign_test_samples: int = 16  # per cell length of the tested segment
    T: float | None = None
    exact_normals: bool = False
    exact_normals_until: float = INF
    record_sideways: bool = False
    classical: bool = False
    slope_cap: float | None = 4.0
    stability_delta: float = 0.1
    skew_theta: str = "normal"  # or "position"
    max_past: int | None = None
    R_max_factor: int = 3

    def __post_init__(self):
        if self.T is None:
            self.T = self.grid.T
        if not 0 < self.s_fraction <= 0.5:
            raise ValueError(f"s_fraction must lie in (0, 1/2], got {self.s_fraction}")
        if self.r1 > self.r2 or self.r1_skew > self.r2_skew:
            raise ValueError("r1 must not exceed r2")
        if self.skew_theta not in ("normal", "position"):
            raise ValueError(f"skew_theta must be 'normal' or 'position', got {self.skew_theta!r}")

    @property
    def N(self) -> int:
        return self.grid.n - 1

    @property
    def s(self) -> int:
        return max(2, int(math.floor(self.s_fraction * self.N)))

    @classmethod
    def field_names(cls) -> list:
        return [f.name for f in fields(cls) if f.name != "grid"]


@dataclass
class InitialFront:
    """Initial curve as the zero set of ``phi0``; ``exact`` gives phi(x, y, t) when known."""

    phi0: Callable
    exact: object | None = None

    def exact_phi(self, x, y, t):
        if self.exact is None:
            return None
        return self.exact.phi(x, y, t)


@dataclass
class RescueOutcome:
    status: str  # assigned_target | assigned_origin | failed
    point: SurfacePoint | None
    attempts: int

    def __post_init__(self):
        if self.status not in ("assigned_target", "assigned_origin", "failed"):
            raise ValueError(f"bad status {self.status!r}")


@dataclass
class RunLog:
    rescues: int = 0
    failures: list = field(default_factory=list)  # (i, j, alpha, beta, psi_ab)
    sideways_points: list = field(default_factory=list)
    refine_events: int = 0


def _sgn(v: float) -> int:
    return int(v > 0) - int(v < 0)


def _exact_normal(exact, x, y, t, eps=1e-6):
    if exact is None:
        return None
    if hasattr(exact, "normal"):
        return exact.normal(x, y, t)
    g = (
        (exact.phi(x + eps, y, t) - exact.phi(x - eps, y, t)) / (2 * eps),
        (exact.phi(x, y + eps, t) - exact.phi(x, y - eps, t)) / (2 * eps),
        (exact.phi(x, y, t + eps) - exact.phi(x, y, max(t - eps, 0.0))) / (t + eps - max(t - eps, 0.0)),
    )
    return unit(g)


def _exact_valid(exact, t) -> bool:
    if exact is None:
        return False
    lo, hi = getattr(exact, "valid_t", (0.0, INF))
    return lo <= t <= hi


def initialize(curve: InitialFront, config: EngineConfig, F: SpeedField) -> MarchState:
    """Seed the band with grid points within one cell of the initial curve."""
    grid = config.grid
    state = MarchState(grid)
    X, Y = np.meshgrid(grid.xs, grid.ys, indexing="ij")
    phi0 = np.asarray(curve.phi0(X, Y), dtype=float)
    f0 = F.many(X, Y, np.zeros_like(X))
    side = np.sign(f0) * phi0
    state.initial_side = np.sign(phi0).astype(int)
    seeds = np.argwhere((side >= 0) & (side < grid.h) & (np.abs(f0) >= MIN_SPEED))
    if seeds.size == 0:
        raise CurveOffGridError("initial curve does not meet the grid")
    # cells the initial motion has already swept past act like a frozen
    # interior: only a front of the opposite orientation may enter them
    for i, j in np.argwhere(side < 0):
        ij = (int(i), int(j))
        state.far_away.discard(ij)
        state.behind[ij] = int(np.sign(f0[ij]))
    exact = curve.exact
    for i, j in seeds:
        i, j = int(i), int(j)
        x, y = grid.x(i), grid.y(j)
        f = f0[i, j]
        psi = abs(phi0[i, j]) / abs(f)
        if exact is not None and phi0[i, j] != 0.0:
            g = lambda t: exact.phi(x, y, t)
            hi = max(4 * psi, grid.h / abs(f))
            try:
                if g(0.0) * g(hi) < 0:
                    psi = brentq(g, 0.0, hi, xtol=1e-15)
            except ValueError:
                pass
        n3 = _exact_normal(exact, x, y, psi) if exact is not None else None
        if n3 is None:
            gx, gy = _grad2(curve.phi0, x, y)
            gn = math.hypot(gx, gy)
            n3 = unit((gx, gy, -f * gn))
        p = SurfacePoint(i, j, x, y, psi, n3, source="init")
        state.narrow_band.push(p)
        state.far_away.discard((i, j))
    return state


def _grad2(phi0, x, y, eps=1e-7):
    gx = (phi0(x + eps, y) - phi0(x - eps, y)) / (2 * eps)
    gy = (phi0(x, y + eps) - phi0(x, y - eps)) / (2 * eps)
    return float(gx), float(gy)


def update_pile(state: MarchState, p_ab: SurfacePoint, F: SpeedField) -> None:
    """Queue neighbours of the accepted point that the front can reach next."""
    f = F(p_ab.x, p_ab.y, p_ab.psi)
    sf = _sgn(f)
    n2 = p_ab.normal2
    side = state.initial_side
    for di, dj in OFFSETS:
        a, b = p_ab.i + di, p_ab.j + dj
        if not state.grid.inside(a, b):
            continue
        if state.grid_fn[a, b] < INF or side is None:
            sd = _sgn(di * n2[0] + dj * n2[1])
        else:
            # a cell the front never crossed is still on its initial side
            sd = int(side[a, b])
        if not (sd == sf or sd == 0 or sf == 0):
            continue
        if state.grid_fn[a, b] < INF:
            q = state.latest[(a, b)]
            if q.orient != p_ab.orient:
                _pile_add(state, (a, b))
        elif (a, b) in state.far_away or (a, b) in state.narrow_band:
            _pile_add(state, (a, b))
        elif state.behind.get((a, b), p_ab.orient) != p_ab.orient:
            _pile_add(state, (a, b))


def _pile_add(state: MarchState, ij) -> None:
    if ij not in state.pile:
        state.pile.append(ij)


def neigh_eik(state: MarchState, ij, p_ab: SurfacePoint, F: SpeedField, check_speed: bool) -> dict:
    """Grid-current accepted 4-neighbours sharing p_ab's orientation."""
    out = {}
    i, j = ij
    for off in OFFSETS:
        q = state.latest.get((i + off[0], j + off[1]))
        if q is None or q.orient != p_ab.orient:
            continue
        if check_speed and abs(F(q.x, q.y, q.psi)) < MIN_SPEED:
            continue
        out[off] = q
    return out


class Engine:
    """One marching run; holds the state, config and bookkeeping."""

    def __init__(self, curve: InitialFront, F: SpeedField, config: EngineConfig):
        self.curve = curve
        self.F = F
        self.config = config
        self.log = RunLog()
        self.state = initialize(curve, config, F)

    # -- eikonal step -------------------------------------------------
    def tentative(self, ij, p_ab: SurfacePoint):
        F = self.F
        grid = self.config.grid
        nbrs = neigh_eik(self.state, ij, p_ab, F, F.time_dependent)
        if not nbrs:
            return None, nbrs
        try:
            if F.time_dependent:
                res = eikonal.tfmm_update(ij, nbrs, F, grid, p_ab.orient)
            else:
                res = eikonal.fmm_point_update(ij, nbrs, F, grid, p_ab.orient)
        except ZeroSpeedError:
            return None, nbrs
        return res, nbrs

    def _finish_normal(self, p: SurfacePoint) -> SurfacePoint:
        cfg = self.config
        exact = self.curve.exact
        if cfg.exact_normals and p.psi < cfg.exact_normals_until and _exact_valid(exact, p.psi):
            try:
                n3 = _exact_normal(exact, p.x, p.y, p.psi)
            except ValueError:
                return p
            return SurfacePoint(p.i, p.j, p.x, p.y, p.psi, n3, p.source, p.attempts)
        return p

    def update_narrow_band(self, p_ab: SurfacePoint) -> None:
        state = self.state
        grid = self.config.grid
        F = self.F
        source = "tfmm" if F.time_dependent else "fmm"
        pile, state.pile = state.pile, []
        for ij in pile:
            i, j = ij
            res, nbrs = self.tentative(ij, p_ab)
            ok = res is not None and res.psi < INF
            if ok:
                new = SurfacePoint(i, j, grid.x(i), grid.y(j), res.psi, res.normal3, source=source)
                for q in nbrs.values():
                    d = sign_test(q, new, F, h=grid.h, per_cell=self.config.sign_test_samples)
                    if d.d > 1:
                        self.log.refine_events += 1
                        raise RefineError(
                            f"speed changes sign {d.d} times between "
                            f"({q.x}, {q.y}, {q.psi}) and ({new.x}, {new.y}, {new.psi})"
                        )
                    if d.d == 1:
                        ok = False
                        break
                if ok and new.psi > self.config.T:
                    continue  # cannot be accepted before the final time
                if ok and F(new.x, new.y, new.psi) == 0.0:
                    ok = False
            if not ok:
                if res is None and not nbrs:
                    continue
                out = self.rescue(p_ab, ij)
                if out.status == "failed":
                    self.log.failures.append((i, j, p_ab.i, p_ab.j, p_ab.psi))
                    continue
                new = out.point
            new = self._finish_normal(new)
            state.narrow_band.push(new)
            state.far_away.discard((new.i, new.j))

    # -- sideways rescue ----------------------------------------------
    def _attempt_plan(self, p_ab: SurfacePoint) -> list:
        n1, n2 = p_ab.normal3[0], p_ab.normal3[1]
        first, second = ("yt", "xt") if abs(n1) > abs(n2) else ("xt", "yt")
        if self.config.skew_theta == "normal":
            theta = math.atan2(n2, n1)
        else:
            theta = math.atan2(p_ab.y, p_ab.x)
        return [(first, 0.0), (second, 0.0), ("skew", theta)]

    def rescue(self, p_ab: SurfacePoint, target) -> RescueOutcome:
        cfg = self.config
        grid = cfg.grid
        F = self.F
        h = grid.h
        self.log.rescues += 1
        tx, ty = grid.x(target[0]), grid.y(target[1])
        origin = (p_ab.x, p_ab.y)
        s = cfg.s
        for attempt, (rep, theta) in enumerate(self._attempt_plan(p_ab), start=1):
            th = rep_angle(rep, theta)
            comp = p_ab.normal3[0] * math.cos(th) + p_ab.normal3[1] * math.sin(th)
            a = -_sgn(comp)
            if a == 0:
                continue
            r1, r2 = (cfg.r1_skew, cfg.r2_skew) if rep == "skew" else (cfg.r1, cfg.r2)
            p3 = (p_ab.x, p_ab.y, p_ab.psi)
            try:
                limit = cfl_dt(3.0, F.local_bound(p3, 2 * h), F.local_lipschitz(p3, 2 * h), cfg.stability_delta, h)
            except ValueError:
                limit = INF
            dt1 = min(r1 * h, limit)
            try:
                patch = convert_to_sideways(
                    self.state, p_ab, rep, s, F, theta=th, a=a, dt=dt1, max_past=cfg.max_past
                )
            except InsufficientDataError as exc:
                log.debug("rescue %s at %s, %s: %s", rep, (p_ab.i, p_ab.j), target, exc)
                continue
            policy = DtPolicy(r1=r1, r2=r2, delta=cfg.stability_delta, slope_cap=cfg.slope_cap)

            def stop(pt, tx=tx, ty=ty):
                r = pt.rows - 2
                if r < pt.anchor_row:
                    return False
                return (
                    extract_crossing(pt, (tx, ty), start_row=r) is not None
                    or extract_crossing(pt, origin, start_row=r) is not None
                    or pt.times[-1] > cfg.T + 2 * r2 * h
                )

            solve_patch(patch, F, R_max=patch.anchor_row + cfg.R_max_factor * s, dt_policy=policy, stop=stop)
            if cfg.record_sideways:
                self._record(patch, rep)
            log.debug(
                "rescue %s at %s -> %s: %d rows, t in [%.4g, %.4g]",
                rep, (p_ab.i, p_ab.j), target, patch.rows, patch.times[0], patch.times[-1],
            )
            for status, (x, y), ij in (
                ("assigned_target", (tx, ty), target),
                ("assigned_origin", origin, (p_ab.i, p_ab.j)),
            ):
                c = extract_crossing(patch, (x, y))
                if c is None or not c.psi <= cfg.T:
                    continue
                pt = SurfacePoint(
                    ij[0], ij[1], grid.x(ij[0]), grid.y(ij[1]), c.psi, c.normal3,
                    source=f"sideways-{rep}", attempts=attempt,
                )
                return RescueOutcome(status, pt, attempt)
        return RescueOutcome("failed", None, 3)

    def _record(self, patch, rep) -> None:
        for r in range(patch.anchor_row + 1, patch.rows):
            x, y, t, _ = patch.points(r)
            for k in range(x.shape[0]):
                self.log.sideways_points.append((float(x[k]), float(y[k]), float(t[k]), rep))

    # -- main loop ----------------------------------------------------
    def run(self) -> list:
        state = self.state
        T = self.config.T
        while state.narrow_band:
            p = nb_extract_min(state)
            if p.psi < T:
                update_pile(state, p, self.F)
            self.update_narrow_band(p)
        return state.accepted


def run(curve: InitialFront, F: SpeedField, config: EngineConfig, return_engine: bool = False):
    """March the front to completion and return the accepted cloud."""
    if config.classical:
        pts = run_classical(curve, F, config)
        return (pts, None) if return_engine else pts
    eng = Engine(curve, F, config)
    pts = eng.run()
    return (pts, eng) if return_engine else pts


def run_classical(curve: InitialFront, F: SpeedField, config: EngineConfig) -> list:
    """Standalone fast marching from the same seeds; the curve interior is frozen."""
    if F.time_dependent:
        raise ValueError("classical mode needs a time-independent speed")
    state = initialize(curve, config, F)
    grid = config.grid
    X, Y = np.meshgrid(grid.xs, grid.ys, indexing="ij")
    phi0 = np.asarray(curve.phi0(X, Y), dtype=float)
    f0 = F.many(X, Y, np.zeros_like(X))
    frozen = np.sign(f0) * phi0 < 0
    seeds = state.narrow_band.points()
    return eikonal.classical_fmm(grid, F, seeds, frozen=frozen, T=config.T)
