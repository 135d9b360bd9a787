"""Error oracles: a fine-grid level-set solver, zero-contour sampling and error metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from . import kernels
from .exact import ExactSolution, InvalidTimeError
from .grid import GridSpec, SurfacePoint

REGIONS = ("bottom", "top", "sideways", "global")


class CFLError(ValueError):
    """Time step too large for the explicit level-set update."""


class EmptyRegionError(ValueError):
    pass


# -- level-set solver -------------------------------------------------------
def _pad2(phi: np.ndarray) -> np.ndarray:
    """Two ghost layers by linear extrapolation."""
    p = np.pad(phi, 2, mode="edge")
    for k in (1, 0):
        p[k, :] = 2 * p[k + 1, :] - p[k + 2, :]
        p[-1 - k, :] = 2 * p[-2 - k, :] - p[-3 - k, :]
        p[:, k] = 2 * p[:, k + 1] - p[:, k + 2]
        p[:, -1 - k] = 2 * p[:, -2 - k] - p[:, -3 - k]
    return p


def _grad_norm(phi: np.ndarray, f: np.ndarray, h: float) -> np.ndarray:
    return kernels.godunov_norm(_pad2(phi), f, h)


def _speed_on(F, X, Y, t):
    f = F.many(X, Y, np.full_like(X, t)) if hasattr(F, "many") else F(X, Y, t)
    return np.broadcast_to(np.asarray(f, dtype=float), X.shape)


def lsm_steps(F, phi0: np.ndarray, grid: GridSpec, T: float, dt: float) -> Iterator[tuple]:
    """Yield (t, phi) after every step of phi_t + F |grad phi| = 0, starting with (0, phi0).

    Space: second-order one-sided differences with Godunov upwinding.
    Time: two-stage Runge-Kutta (Heun). No reinitialization.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    X, Y = np.meshgrid(grid.xs, grid.ys, indexing="ij")
    h = grid.h
    phi = np.array(phi0, dtype=float)
    t = 0.0
    yield t, phi
    nsteps = int(math.ceil(T / dt - 1e-9))
    for k in range(nsteps):
        step = min(dt, T - t)
        f0 = _speed_on(F, X, Y, t)
        f1 = _speed_on(F, X, Y, t + step)
        fmax = max(float(np.max(np.abs(f0))), float(np.max(np.abs(f1))))
        if fmax * dt > 0.5 * h * (1 + 1e-12):
            raise CFLError(f"dt={dt} exceeds 0.5*h/max|F| = {0.5 * h / fmax} at t={t}")
        k1 = -f0 * _grad_norm(phi, f0, h)
        mid = phi + step * k1
        k2 = -f1 * _grad_norm(mid, f1, h)
        phi = phi + 0.5 * step * (k1 + k2)
        t = T if k == nsteps - 1 else t + step
        yield t, phi


def lsm_solve(F, phi0: np.ndarray, grid: GridSpec, T: float, dt: float, keep_every: int = 1) -> list:
    """List of (t, phi) from ``lsm_steps``, keeping every ``keep_every``-th step and the last."""
    out = []
    last = None
    for k, item in enumerate(lsm_steps(F, phi0, grid, T, dt)):
        last = item
        if k % keep_every == 0:
            out.append(item)
    if last is not None and out[-1] is not last:
        out.append(last)
    return out


# -- zero contour -----------------------------------------------------------
def contour_points(phi: np.ndarray, grid: GridSpec, t: float, spacing: float | None = None) -> np.ndarray:
    """Points (x, y, t) where phi vanishes on cell edges, by linear interpolation.

    Crossings closer than spacing/2 (default h/2) are merged. An array of
    shape (0, 3) comes back when phi has one sign.
    """
    h = grid.h
    spacing = h if spacing is None else spacing
    xs, ys = grid.xs, grid.ys
    pts = []
    for axis in (0, 1):
        a = phi[:-1, :] if axis == 0 else phi[:, :-1]
        b = phi[1:, :] if axis == 0 else phi[:, 1:]
        hit = ((a < 0) & (b > 0)) | ((a > 0) & (b < 0)) | ((a == 0) & (b != 0))
        ii, jj = np.nonzero(hit)
        if ii.size == 0:
            continue
        fa, fb = a[ii, jj], b[ii, jj]
        frac = fa / (fa - fb)
        if axis == 0:
            px, py = xs[ii] + frac * h, ys[jj]
        else:
            px, py = xs[ii], ys[jj] + frac * h
        pts.append(np.column_stack([px, py]))
    # exact zeros at the last row/column are missed above when the neighbour is also 0; add vertices
    zi, zj = np.nonzero(phi == 0)
    if zi.size:
        pts.append(np.column_stack([xs[zi], ys[zj]]))
    if not pts:
        return np.empty((0, 3))
    xy = np.concatenate(pts)
    xy = _merge_close(xy, spacing / 2)
    return np.column_stack([xy, np.full(xy.shape[0], float(t))])


def _merge_close(xy: np.ndarray, tol: float) -> np.ndarray:
    if xy.shape[0] < 2 or tol <= 0:
        return xy
    from scipy.spatial import cKDTree

    tree = cKDTree(xy)
    keep = np.ones(xy.shape[0], dtype=bool)
    for a, b in sorted(tree.query_pairs(tol)):
        if keep[a] and keep[b]:
            keep[b] = False
    return xy[keep]


@dataclass
class OracleCloud:
    points: np.ndarray  # (k, 3) samples of the space-time surface
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)

    def __len__(self):
        return self.points.shape[0]


def oracle_cloud(F, phi0: np.ndarray, grid: GridSpec, T: float, dt: float | None = None) -> OracleCloud:
    """Zero-contour samples of the fine level-set solution at every time step."""
    if dt is None:
        X, Y = np.meshgrid(grid.xs, grid.ys, indexing="ij")
        ts = np.linspace(0.0, T, 9)
        fmax = max(float(np.max(np.abs(_speed_on(F, X, Y, t)))) for t in ts)
        dt = 0.25 * grid.h / fmax if fmax > 0 else T
    chunks = [contour_points(phi, grid, t) for t, phi in lsm_steps(F, phi0, grid, T, dt)]
    pts = np.concatenate(chunks) if chunks else np.empty((0, 3))
    return OracleCloud(pts, {"h": grid.h, "n": grid.n, "dt": dt, "T": T})


# -- errors ----------------------------------------------------------------
def error_method1(p: SurfacePoint, exact: ExactSolution) -> float:
    """|phi(x, y, psi)| for a signed-distance exact solution; nan when psi is infinite."""
    if not math.isfinite(p.psi):
        return math.nan
    if not exact.signed_distance:
        raise ValueError(f"{exact.name}: exact solution is not a signed distance")
    exact.check_time(p.psi)
    return abs(float(exact.phi(p.x, p.y, p.psi)))


def _dist(q: np.ndarray, pts: np.ndarray) -> np.ndarray:
    d = pts - q
    return np.sqrt(d[:, 0] * d[:, 0] + d[:, 1] * d[:, 1] + d[:, 2] * d[:, 2])


class NearestIndex:
    """Exact nearest-neighbour queries in 3D through uniform cubic bins."""

    def __init__(self, points, cell: float | None = None):
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        if pts.shape[0] == 0:
            raise ValueError("cannot index an empty cloud")
        self.points = pts
        lo = pts.min(axis=0)
        span = float(np.max(pts.max(axis=0) - lo))
        if cell is None:
            # a few points per bin for a volume cloud, a few dozen on a surface
            cell = max(span / max(pts.shape[0] ** (1.0 / 3.0), 1.0), 1e-12)
        self.cell = float(cell)
        self.origin = lo
        keys = np.floor((pts - lo) / self.cell).astype(np.int64)
        self._kmax = keys.max(axis=0)
        order = np.lexsort((keys[:, 2], keys[:, 1], keys[:, 0]))
        ks = keys[order]
        change = np.nonzero(np.any(np.diff(ks, axis=0) != 0, axis=1))[0] + 1
        starts = np.concatenate([[0], change])
        ends = np.concatenate([change, [len(order)]])
        self._bins = {tuple(int(c) for c in ks[s]): order[s:e] for s, e in zip(starts, ends)}

    def _ring(self, key, r) -> np.ndarray:
        """Indices of points in bins at Chebyshev distance exactly r from ``key``."""
        kx, ky, kz = key
        found = []
        for dx in range(-r, r + 1):
            for dy in range(-r, r + 1):
                edge = abs(dx) == r or abs(dy) == r
                dzs = range(-r, r + 1) if edge else (-r, r)
                for dz in dzs:
                    idx = self._bins.get((kx + dx, ky + dy, kz + dz))
                    if idx is not None:
                        found.append(idx)
        return np.concatenate(found) if found else np.empty(0, dtype=np.int64)

    def query(self, q) -> tuple:
        """(distance, index) of the nearest indexed point."""
        q = np.asarray(q, dtype=float)
        key = tuple(int(c) for c in np.floor((q - self.origin) / self.cell))
        # rings beyond this radius contain no bins
        far = int(max(np.max(np.abs(np.array(key))), np.max(np.abs(np.array(key) - self._kmax)))) + 1
        best, arg = math.inf, -1
        for r in range(0, far + 1):
            idx = self._ring(key, r)
            if idx.size:
                d = _dist(q, self.points[idx])
                m = d.min()
                k = int(idx[d == m].min())
                if m < best or (m == best and k < arg):
                    best, arg = float(m), k
            if best <= r * self.cell:
                break
        return best, arg

    def brute(self, q) -> tuple:
        d = _dist(np.asarray(q, dtype=float), self.points)
        k = int(np.argmin(d))  # first index among ties
        return float(d[k]), k


def error_method2(p, cloud) -> float:
    """3D distance from ``p`` to the nearest oracle sample; ``cloud`` may be prebuilt."""
    index = cloud if isinstance(cloud, NearestIndex) else NearestIndex(
        cloud.points if isinstance(cloud, OracleCloud) else cloud
    )
    q = (p.x, p.y, p.psi) if isinstance(p, SurfacePoint) else p
    if not math.isfinite(q[2]):
        return math.nan
    return index.query(q)[0]


# -- aggregation -------------------------------------------------------------
def tag_region(p: SurfacePoint, turning_time: float | None) -> str:
    """sideways for points from a sideways patch, else bottom/top relative to the turning time."""
    if p.source.startswith("sideways"):
        return "sideways"
    if turning_time is None or p.psi < turning_time:
        return "bottom"
    return "top"


def aggregate(errors, region: str, dim: int | None, h: float) -> tuple:
    """(L1, Linf, relative errors) with L1 = h^dim * sum; nan entries are skipped.

    ``dim`` defaults to 1 for the sideways region and 2 otherwise.
    """
    if region not in REGIONS:
        raise ValueError(f"unknown region {region!r}")
    if dim is None:
        dim = 1 if region == "sideways" else 2
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    e = np.asarray([v for v in errors if not math.isnan(v)], dtype=float)
    if e.size == 0:
        raise EmptyRegionError(f"no errors in region {region!r}")
    if np.any(e < 0):
        raise ValueError("errors must be nonnegative")
    linf = float(e.max())
    rel = e / linf if linf > 0 else np.zeros_like(e)
    return h**dim * float(e.sum()), linf, rel.tolist()


def loglog_slope(hs, values) -> float:
    """Least-squares slope of log(values) against log(hs)."""
    hs = np.asarray(hs, dtype=float)
    v = np.asarray(values, dtype=float)
    if hs.size < 2:
        return math.nan
    return float(np.polyfit(np.log(hs), np.log(v), 1)[0])
