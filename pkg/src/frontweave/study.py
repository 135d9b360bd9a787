"""Convergence sweeps and oracle generation for registered examples."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analysis import region_errors
from .engine import run
from .reference import NearestIndex, OracleCloud, loglog_slope, oracle_cloud
from .registry import get_example
from .sideways import DtPolicy, SidewaysPatch, solve_patch


@dataclass
class SweepRow:
    n: int
    h: float
    L1: float
    Linf: float
    slope: float  # fit over this and all coarser grids


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("FRONTWEAVE_THREADS", "1")))
    except ValueError:
        return 1


def run_example(name: str, n: int, **overrides):
    """Accepted cloud and engine for example ``name`` on ``n`` intervals."""
    ex = get_example(name)
    cfg = ex.config(n, **overrides)
    pts, eng = run(ex.initial, ex.F, cfg, return_engine=True)
    return pts, eng, cfg


def example_oracle(name: str, n_fine: int, dt: float | None = None) -> OracleCloud:
    """Fine level-set oracle on the example's own domain."""
    ex = get_example(name)
    grid = ex.grid(n_fine)
    X, Y = np.meshgrid(grid.xs, grid.ys, indexing="ij")
    phi0 = np.asarray(ex.initial.phi0(X, Y), dtype=float)
    cloud = oracle_cloud(ex.F, phi0, grid, ex.T_F, dt)
    cloud.meta["example"] = name
    return cloud


def _one_grid(args):
    name, n, method, cloud_pts, overrides = args
    ex = get_example(name)
    pts, _, cfg = run_example(name, n, **overrides)
    turning = ex.notes.get("turning_time")
    if method == 1:
        errs = region_errors(pts, exact=ex.exact, h=cfg.grid.h, turning_time=turning)
    else:
        errs = region_errors(pts, cloud=NearestIndex(cloud_pts), h=cfg.grid.h, turning_time=turning)
    return n, cfg.grid.h, errs, pts


def sweep(name: str, grids, method: int = 1, region: str = "global", cloud: OracleCloud | None = None,
          keep_points: bool = False, **overrides):
    """Rows (n, h, L1, Linf, slope) for one region, plus per-grid error dicts.

    Method 2 builds an oracle at four times the finest grid when none is given.
    """
    if method not in (1, 2):
        raise ValueError("method must be 1 or 2")
    ex = get_example(name)
    if method == 1 and (ex.exact is None or not ex.exact.signed_distance):
        raise ValueError(f"{name}: Method 1 needs a signed-distance exact solution")
    grids = sorted(int(n) for n in grids)
    if method == 2 and cloud is None:
        cloud = example_oracle(name, 4 * grids[-1])
    pts_arr = cloud.points if cloud is not None else None
    jobs = [(name, n, method, pts_arr, overrides) for n in grids]
    workers = min(thread_cap(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_one_grid, jobs))
    else:
        results = [_one_grid(j) for j in jobs]
    rows, detail = [], {}
    hs, l1s = [], []
    for n, h, errs, pts in results:
        detail[n] = (errs, pts) if keep_points else errs
        e = errs.get(region)
        if e is None:
            rows.append(SweepRow(n, h, math.nan, math.nan, math.nan))
            continue
        hs.append(h)
        l1s.append(e.L1)
        rows.append(SweepRow(n, h, e.L1, e.Linf, loglog_slope(hs, l1s)))
    return rows, detail


# -- sideways patch study ----------------------------------------------------
def exact_branch(exact, z, t, lo: float, hi: float, steps: int = 400) -> np.ndarray:
    """x > lo on the front {phi(x, z, t) = 0} nearest lo, per z; nan where none."""
    from scipy.optimize import brentq

    out = np.full(len(z), np.nan)
    xs = np.linspace(lo, hi, steps + 1)
    for k, zz in enumerate(z):
        v = np.asarray(exact.phi(xs, np.full_like(xs, zz), np.full_like(xs, t)), dtype=float)
        hit = np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) <= 0)[0]
        if hit.size:
            a = hit[0]
            f = lambda x: float(exact.phi(x, zz, t))
            out[k] = xs[a] if f(xs[a]) == 0 else brentq(f, xs[a], xs[a + 1], xtol=1e-14)
    return out


def patch_sweep(name: str, grids, dt_ratio: float = 0.5) -> list:
    """L1 error of a stand-alone y-t sideways patch seeded with exact data.

    The patch covers the example's ``sideways_conv_domain`` and follows the
    right-hand branch of the front; Delta t = dt_ratio * h. The error sums
    over all rows are scaled by h^2 like any space-time region.
    """
    ex = get_example(name)
    if ex.sideways_conv_domain is None:
        raise ValueError(f"{name} has no sideways convergence domain")
    axis, (z0, z1), (t0, t1) = ex.sideways_conv_domain
    if axis != "y":
        raise ValueError("only y-t patches are supported")
    rows, hs, l1s = [], [], []
    for n in sorted(int(v) for v in grids):
        h = (z1 - z0) / n
        z = z0 + h * np.arange(n + 1)
        first = exact_branch(ex.exact, z, t0, 0.0, ex.hi)
        patch = SidewaysPatch("yt", -1, z, t0, h, chi=[np.where(np.isnan(first), np.inf, first)])
        dt = dt_ratio * h
        solve_patch(patch, ex.F, R_max=int(round((t1 - t0) / dt)), dt_policy=DtPolicy.constant(dt))
        total, worst = 0.0, 0.0
        for t, row in zip(patch.times, patch.chi):
            ref = exact_branch(ex.exact, z, t, 0.0, ex.hi)
            ok = np.isfinite(row) & ~np.isnan(ref)
            e = np.abs(row[ok] - ref[ok])
            total += float(e.sum())
            worst = max(worst, float(e.max()) if e.size else 0.0)
        hs.append(h)
        l1s.append(h * h * total)
        rows.append(SweepRow(n, h, h * h * total, worst, loglog_slope(hs, l1s)))
    return rows
