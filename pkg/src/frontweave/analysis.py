"""Post-processing of accepted clouds: region errors, topology slices and escape checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exact import InvalidTimeError
from .grid import GridSpec, SurfacePoint
from .reference import EmptyRegionError, aggregate, error_method1, error_method2, tag_region


def as_array(points) -> np.ndarray:
    """(k, 3) array of (x, y, psi) from surface points or an existing array."""
    if isinstance(points, np.ndarray):
        return points.reshape(-1, 3)
    return np.array([(p.x, p.y, p.psi) for p in points], dtype=float).reshape(-1, 3)


@dataclass
class RegionError:
    region: str
    L1: float
    Linf: float
    count: int
    skipped: int  # points outside the exact solution's range or at psi = inf


def region_errors(points, exact=None, cloud=None, h: float = 1.0, turning_time=None, regions=None) -> dict:
    """Per-region (L1, Linf) of the accepted cloud by Method 1 (``exact``) or Method 2 (``cloud``).

    Empty regions are left out of the result.
    """
    if (exact is None) == (cloud is None):
        raise ValueError("give exactly one of exact or cloud")
    buckets: dict = {"global": [], "bottom": [], "top": [], "sideways": []}
    skipped = dict.fromkeys(buckets, 0)
    for p in points:
        reg = tag_region(p, turning_time)
        try:
            e = error_method1(p, exact) if exact is not None else error_method2(p, cloud)
        except InvalidTimeError:
            e = math.nan
        for r in (reg, "global"):
            if math.isnan(e):
                skipped[r] += 1
            else:
                buckets[r].append(e)
    out = {}
    for r, errs in buckets.items():
        if regions is not None and r not in regions:
            continue
        try:
            L1, Linf, _ = aggregate(errs, r, None, h)
        except EmptyRegionError:
            continue
        out[r] = RegionError(r, L1, Linf, len(errs), skipped[r])
    return out


# -- topology -------------------------------------------------------------
def slab_slice(points, t: float, half_width: float) -> np.ndarray:
    """(x, y) of points with |psi - t| <= half_width."""
    P = as_array(points)
    return P[np.abs(P[:, 2] - t) <= half_width, :2]


def occupied_region(points, grid: GridSpec, inside0: np.ndarray, t: float) -> np.ndarray:
    """Boolean grid of cells enclosed by the front at time t.

    A cell flips sides each time the front crosses it, so the parity of its
    crossings up to t, applied to the initial inside mask, gives its side.
    """
    P = as_array(points)
    h = grid.h
    m = P[:, 2] <= t
    I = np.rint((P[m, 0] - grid.x_min) / h).astype(int)
    J = np.rint((P[m, 1] - grid.y_min) / h).astype(int)
    cnt = np.zeros((grid.n, grid.n), dtype=int)
    np.add.at(cnt, (I, J), 1)
    return np.asarray(inside0, dtype=bool) ^ (cnt % 2 == 1)


def front_slice(points, grid: GridSpec, inside0: np.ndarray, t: float) -> np.ndarray:
    """(x, y) of inside cells with an outside 4-neighbour at time t."""
    ins = occupied_region(points, grid, inside0, t)
    pad = np.pad(ins, 1, constant_values=False)
    edge = ~pad[2:, 1:-1] | ~pad[:-2, 1:-1] | ~pad[1:-1, 2:] | ~pad[1:-1, :-2]
    ij = np.argwhere(ins & edge)
    return np.column_stack([grid.x_min + ij[:, 0] * grid.h, grid.y_min + ij[:, 1] * grid.h])


def count_clusters(xy, radius: float) -> int:
    """Connected components of the graph joining points closer than ``radius``."""
    from scipy.sparse.csgraph import connected_components
    from scipy.spatial import cKDTree

    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    if xy.shape[0] == 0:
        return 0
    tree = cKDTree(xy)
    graph = tree.sparse_distance_matrix(tree, radius)
    return int(connected_components(graph, directed=False)[0])


def pinch_time(points, h: float, after: float, axis_x: float = 0.0) -> float:
    """Latest arrival on the line x = axis_x after ``after``; nan if none.

    For two merged blobs shrinking back apart this is when the neck closes.
    """
    P = as_array(points)
    m = (np.abs(P[:, 0] - axis_x) <= h / 2) & (P[:, 2] > after) & np.isfinite(P[:, 2])
    return float(P[m, 2].max()) if m.any() else math.nan


# -- escaped points -----------------------------------------------------------
def distance_estimate(exact, P: np.ndarray) -> np.ndarray:
    """|phi| / |grad_xy phi| as a first-order distance to the exact front."""
    phi = np.asarray(exact.phi(P[:, 0], P[:, 1], P[:, 2]), dtype=float)
    if exact.grad is not None:
        gx, gy, _ = exact.grad(P[:, 0], P[:, 1], P[:, 2])
    else:
        eps = 1e-6
        gx = (exact.phi(P[:, 0] + eps, P[:, 1], P[:, 2]) - exact.phi(P[:, 0] - eps, P[:, 1], P[:, 2])) / (2 * eps)
        gy = (exact.phi(P[:, 0], P[:, 1] + eps, P[:, 2]) - exact.phi(P[:, 0], P[:, 1] - eps, P[:, 2])) / (2 * eps)
    g = np.hypot(gx, gy)
    return np.where(g > 0, np.abs(phi) / np.where(g > 0, g, 1.0), np.inf)


@dataclass
class EscapeReport:
    checked: int
    escaped: int
    max_distance: float  # in units of h
    examples: list  # a few (x, y, psi) of escaped points

    @property
    def defect(self) -> bool:
        return self.escaped > 0


def escaped_points(points, exact, h: float, after: float, k: float = 3.0) -> EscapeReport:
    """Accepted points with psi > after lying more than k*h from the exact front."""
    P = as_array(points)
    P = P[(P[:, 2] > after) & np.isfinite(P[:, 2])]
    if P.shape[0] == 0:
        return EscapeReport(0, 0, 0.0, [])
    d = distance_estimate(exact, P) / h
    bad = d > k
    order = np.argsort(-d[bad])[:5]
    return EscapeReport(int(P.shape[0]), int(bad.sum()), float(d.max()), P[bad][order].tolist())
