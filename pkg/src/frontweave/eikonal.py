"""Local eikonal updates: classical fast marching and its time-dependent variant."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import INF, GridSpec, NarrowBand, SurfacePoint, unit

# neighbour offsets (di, dj) making up each quadrant as (v, u)
QUADRANTS = {
    1: ((0, 1), (1, 0)),
    2: ((0, 1), (-1, 0)),
    3: ((0, -1), (-1, 0)),
    4: ((0, -1), (1, 0)),
}

MIN_SPEED = 1e-12


class ZeroSpeedError(ValueError):
    """The local speed vanishes; the caller must switch representation."""


@dataclass(frozen=True)
class QuadrantData:
    psi_v: float
    psi_u: float
    tau_v: float
    tau_u: float


def fmm_update(u: float, v: float, h: float, F_ij: float) -> float:
    if F_ij == 0:
        raise ZeroSpeedError("fmm_update called with zero speed")
    return kernels.fmm_update(u, v, h, F_ij)


def quadrant_solve(q: QuadrantData) -> tuple:
    """(value, xi) of the quadrant minimum; value is +inf when both sides are missing."""
    return kernels.quadrant_minimize(q.psi_v, q.psi_u, q.tau_v, q.tau_u)


def quadrant_minimize(q: QuadrantData) -> float:
    return quadrant_solve(q)[0]


def normal_from_fmm(psi_ij: float, used_neighbors: dict, h: float, orient: int) -> tuple:
    """Unit normal from one-sided differences against the neighbours used.

    ``used_neighbors`` maps an axis (0 for x, 1 for y) to ``(psi_nb, side)``
    where ``side`` is +1 for the i+1 / j+1 neighbour and -1 for i-1 / j-1.
    Missing axes get a zero component.
    """
    grad = [0.0, 0.0]
    for axis, (psi_nb, side) in used_neighbors.items():
        grad[axis] = (psi_ij - psi_nb) / (-side * h)
    return unit((orient * grad[0], orient * grad[1], -float(orient)))


@dataclass
class EikonalResult:
    psi: float
    quadrant: int
    normal3: tuple | None
    used: dict  # axis -> (psi_nb, side)
    contributors: list  # SurfacePoints entering the value


def _used_from_xi(xi: float, pv: SurfacePoint | None, pu: SurfacePoint | None, dv, du):
    used, contrib = {}, []
    if xi > 0.0 and pv is not None:
        used[1] = (pv.psi, dv[1])
        contrib.append(pv)
    if xi < 1.0 and pu is not None:
        used[0] = (pu.psi, du[0])
        contrib.append(pu)
    return used, contrib


def tfmm_update(ij, neighbors: dict, F, grid: GridSpec, orient: int = 1) -> EikonalResult:
    """Time-dependent update over all four quadrants.

    ``neighbors`` maps offsets (di, dj) to admissible accepted points.
    Slowness is h / |F| evaluated at each neighbour's own arrival time.
    """
    h = grid.h
    tau = {}
    for off, p in neighbors.items():
        f = abs(F(p.x, p.y, p.psi))
        tau[off] = h / f if f >= MIN_SPEED else INF
    best = INF
    best_q = 0
    best_xi = math.nan
    for q, (dv, du) in QUADRANTS.items():
        pv = neighbors.get(dv)
        pu = neighbors.get(du)
        psi_v = pv.psi if pv is not None and tau[dv] < INF else INF
        psi_u = pu.psi if pu is not None and tau[du] < INF else INF
        if psi_v == INF and psi_u == INF:
            continue
        val, xi = kernels.quadrant_minimize(
            psi_v, psi_u, tau.get(dv, INF) if psi_v < INF else INF, tau.get(du, INF) if psi_u < INF else INF
        )
        if val < best:
            best, best_q, best_xi = val, q, xi
    if best == INF:
        return EikonalResult(INF, 0, None, {}, [])
    dv, du = QUADRANTS[best_q]
    pv = neighbors.get(dv) if tau.get(dv, INF) < INF else None
    pu = neighbors.get(du) if tau.get(du, INF) < INF else None
    used, contrib = _used_from_xi(best_xi, pv, pu, dv, du)
    return EikonalResult(best, best_q, normal_from_fmm(best, used, h, orient), used, contrib)


def fmm_point_update(ij, neighbors: dict, F, grid: GridSpec, orient: int = 1) -> EikonalResult:
    """Classical update for a time-independent speed."""
    i, j = ij
    h = grid.h
    f = F(grid.x(i), grid.y(j), 0.0)
    if abs(f) < MIN_SPEED:
        raise ZeroSpeedError(f"speed vanishes at ({i}, {j})")
    best_x = best_y = None
    for off in ((1, 0), (-1, 0)):
        p = neighbors.get(off)
        if p is not None and (best_x is None or p.psi < best_x[0].psi):
            best_x = (p, off)
    for off in ((0, 1), (0, -1)):
        p = neighbors.get(off)
        if p is not None and (best_y is None or p.psi < best_y[0].psi):
            best_y = (p, off)
    u = best_x[0].psi if best_x else INF
    v = best_y[0].psi if best_y else INF
    if u == INF and v == INF:
        return EikonalResult(INF, 0, None, {}, [])
    psi = kernels.fmm_update(u, v, h, f)
    tau = h / abs(f)
    used, contrib = {}, []
    two_sided = max(u, v) - min(u, v) < tau
    if best_x and (two_sided or u <= v):
        used[0] = (u, best_x[1][0])
        contrib.append(best_x[0])
    if best_y and (two_sided or v < u):
        used[1] = (v, best_y[1][1])
        contrib.append(best_y[0])
    quadrant = _quadrant_of(best_x[1] if best_x else None, best_y[1] if best_y else None)
    return EikonalResult(psi, quadrant, normal_from_fmm(psi, used, h, orient), used, contrib)


def _quadrant_of(ox, oy) -> int:
    sx = ox[0] if ox else 1
    sy = oy[1] if oy else 1
    for q, (dv, du) in QUADRANTS.items():
        if dv[1] == sy and du[0] == sx:
            return q
    return 0


def classical_fmm(
    grid: GridSpec,
    F,
    seeds: list,
    frozen: np.ndarray | None = None,
    T: float = INF,
) -> list:
    """Textbook fast marching for a positive time-independent speed.

    ``seeds`` are SurfacePoints that start in the band; cells marked in
    ``frozen`` are never updated. Returns the accepted points in order.
    Points are only updated from neighbours with psi below ``T``, and
    tentative values above ``T`` are dropped.
    """
    n = grid.n
    band = NarrowBand()
    for p in seeds:
        band.push(p)
    done = np.zeros((n, n), dtype=bool) if frozen is None else frozen.copy()
    known: dict = {}
    accepted = []
    while band:
        p = band.pop()
        done[p.i, p.j] = True
        known[(p.i, p.j)] = p
        accepted.append(p)
        if not p.psi < T:
            continue
        for a, b in grid.neighbors(p.i, p.j):
            if done[a, b]:
                continue
            nbrs = {}
            for off in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                q = known.get((a + off[0], b + off[1]))
                if q is not None:
                    nbrs[off] = q
            res = fmm_point_update((a, b), nbrs, F, grid, orient=p.orient)
            if not res.psi <= T:
                continue
            band.push(
                SurfacePoint(a, b, grid.x(a), grid.y(b), res.psi, res.normal3, source="fmm")
            )
    return accepted
