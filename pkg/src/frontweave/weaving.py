"""Glue between the fast-marching and sideways descriptions of the front."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import LinearNDInterpolator
from scipy.spatial import QhullError

from .eikonal import normal_from_fmm
from .grid import INF, MarchState, SurfacePoint, unit
from .sideways import SidewaysPatch, rep_angle, skew_map

__all__ = [
    "SignTestResult",
    "RefineError",
    "InsufficientDataError",
    "sign_test",
    "orientation_test",
    "normal_from_fmm",
    "normal_from_sideways",
    "neigh_side",
    "convert_to_sideways",
    "extract_crossing",
    "Crossing",
]


MAX_SAMPLES = 4097  # bounds the work on very long segments


class RefineError(RuntimeError):
    """The speed changes sign more than once along a segment: refine the grid."""


class InsufficientDataError(ValueError):
    """Too little accepted data to seed a sideways patch."""


@dataclass(frozen=True)
class SignTestResult:
    d: int

    @property
    def verdict(self) -> str:
        return "pass" if self.d == 0 else ("fail" if self.d == 1 else "refine")

    @property
    def passed(self) -> bool:
        return self.d == 0


def _as_xyt(p):
    if isinstance(p, SurfacePoint):
        return (p.x, p.y, p.psi)
    return tuple(float(c) for c in p)


def count_sign_changes(values) -> int:
    """Strict sign alternations; zeros take the sign that follows them."""
    signs = np.sign(np.asarray(values, dtype=float))
    nz = np.nonzero(signs)[0]
    if nz.size < 2:
        return 0
    s = signs[nz]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def sign_test(p, q, F, samples: int | None = None, h: float | None = None, per_cell: int = 16) -> SignTestResult:
    """Count sign changes of F on the space-time segment from ``p`` to ``q``.

    Without ``samples``, uses ``per_cell`` samples per length ``h`` of the
    segment (at least 2, at most ``MAX_SAMPLES``).
    """
    a = np.array(_as_xyt(p))
    b = np.array(_as_xyt(q))
    if samples is None:
        length = float(np.linalg.norm(b - a))
        scale = h if h else 1.0
        samples = max(2, min(int(math.ceil(per_cell * length / scale)) + 1, MAX_SAMPLES))
    if samples < 2:
        raise ValueError("sign test needs at least two samples")
    s = np.linspace(0.0, 1.0, samples)
    pts = a[None, :] + s[:, None] * (b - a)[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        vals = F.many(pts[:, 0], pts[:, 1], pts[:, 2])
    return SignTestResult(count_sign_changes(vals))


def orientation_test(p: SurfacePoint, q: SurfacePoint) -> bool:
    return p.orient == q.orient


def _sideways_vector(patch: SidewaysPatch, l: int, r: int, dt: float, strict: bool = True):
    chi_now = patch.chi[r]
    prev = patch.chi[r - 1]
    h = patch.h
    if not (np.isfinite(chi_now[l]) and np.isfinite(prev[l])):
        raise ValueError("stencil value missing")
    n = prev.shape[0]
    left = prev[l - 1] if l > 0 else INF
    right = prev[l + 1] if l + 1 < n else INF
    if np.isfinite(left) and np.isfinite(right):
        dz = (right - left) / (2 * h)
    elif strict:
        raise ValueError("missing neighbour in normal stencil")
    elif np.isfinite(right):
        dz = (right - prev[l]) / h
    elif np.isfinite(left):
        dz = (prev[l] - left) / h
    else:
        dz = 0.0
    dtt = (chi_now[l] - prev[l]) / dt
    a = patch.a
    return (-a, a * dz, a * dtt)


def normal_from_sideways(patch: SidewaysPatch, l: int, r: int, h: float | None = None, dt: float | None = None, strict: bool = True) -> tuple:
    """Unit (x, y, t) normal at row ``r``, line ``l`` of a solved patch."""
    if dt is None:
        dt = patch.times[r] - patch.times[r - 1]
    vw, vz, vt = _sideways_vector(patch, l, r, dt, strict)
    c, s = math.cos(patch.theta), math.sin(patch.theta)
    # back from (w, z) to (x, y): e_w = (c, s), e_z = (-s, c)
    return unit((vw * c - vz * s, vw * s + vz * c, vt))


def neigh_side(state: MarchState, p_ab: SurfacePoint, s: int, e_w: tuple) -> np.ndarray:
    """Store indices of accepted points in the (2s+1)^2 window facing like p_ab along e_w.

    A zero component (from a one-dimensional update) counts as compatible.
    """
    idx = state.store.window(p_ab.i, p_ab.j, s)
    eta = p_ab.normal3[0] * e_w[0] + p_ab.normal3[1] * e_w[1]
    comp = state.store.column("n1")[idx] * e_w[0] + state.store.column("n2")[idx] * e_w[1]
    sc = np.sign(comp)
    return idx[(sc == np.sign(eta)) | (sc == 0)]


def convert_to_sideways(
    state: MarchState,
    p_ab: SurfacePoint,
    rep: str,
    s: int,
    F=None,
    *,
    theta: float = 0.0,
    a: int | None = None,
    dt: float | None = None,
    max_past: int | None = None,
    points: list | None = None,
) -> SidewaysPatch:
    """Build a sideways patch around ``p_ab`` from accepted data.

    The patch has 2s+1 lines centred on ``p_ab``; rows are spaced ``dt``
    (default h/3) and one row sits exactly at psi(p_ab). Each line gets
    boundary values by linear interpolation of w against t; cells where
    interpolation is impossible stay +inf.
    """
    grid = state.grid
    h = grid.h
    theta = rep_angle(rep, theta)
    e_w = (math.cos(theta), math.sin(theta))
    if a is None:
        comp = p_ab.normal3[0] * e_w[0] + p_ab.normal3[1] * e_w[1]
        a = -1 if comp > 0 else 1
    if dt is None:
        dt = h / 3
    if points is None:
        idx = neigh_side(state, p_ab, s, e_w)
        px = state.store.column("x")[idx]
        py = state.store.column("y")[idx]
        pt = state.store.column("psi")[idx]
    else:
        px = np.array([p.x for p in points], dtype=float)
        py = np.array([p.y for p in points], dtype=float)
        pt = np.array([p.psi for p in points], dtype=float)
    if pt.size == 0:
        raise InsufficientDataError("no compatible accepted points near the anchor")

    w0, z0 = skew_map(p_ab.x, p_ab.y, theta)
    z_vals = z0 + h * np.arange(-s, s + 1)
    pw, pz = skew_map(px, py, theta)

    line_of = np.rint((pz - z0) / h).astype(int) + s
    if rep in ("yt", "xt"):
        lines = {}
        for k, l in enumerate(line_of):
            if 0 <= l <= 2 * s:
                lines.setdefault(int(l), []).append(k)
        first_last = []
        for l, ks in lines.items():
            ts = pt[ks]
            first_last.append((ts.min(), ts.max()))
    else:
        first_last = [(pt.min(), pt.max())] if pt.size else []
    if not first_last:
        raise InsufficientDataError("no data lines in the window")

    cap = max_past if max_past is not None else s
    earliest_end = min(e for _, e in first_last)
    K = int(math.ceil((p_ab.psi - earliest_end) / dt - 1e-9)) if p_ab.psi > earliest_end else 1
    K = max(1, min(K, cap, int(math.floor(p_ab.psi / dt + 1e-9))))
    times = [p_ab.psi - (K - r) * dt for r in range(K + 1)]
    times[K] = p_ab.psi
    tgrid = np.array(times)

    data = np.full((K + 1, 2 * s + 1), np.nan)
    if rep in ("yt", "xt"):
        for l, ks in lines.items():
            ks = np.array(ks)
            order = np.lexsort((pw[ks], pt[ks]))
            ts, ws = pt[ks][order], pw[ks][order]
            if ts.size == 1:
                hit = np.isclose(tgrid, ts[0], rtol=0, atol=1e-14)
                data[hit, l] = ws[0]
                continue
            inside = (tgrid >= ts[0]) & (tgrid <= ts[-1])
            data[inside, l] = np.interp(tgrid[inside], ts, ws)
    else:
        try:
            interp = LinearNDInterpolator(np.column_stack([pz, pt]), pw)
        except (QhullError, ValueError) as exc:
            raise InsufficientDataError(f"cannot triangulate skewed data: {exc}") from exc
        zz, tt = np.meshgrid(z_vals, tgrid)
        data[:] = interp(zz, tt)
    data[K, s] = w0

    row0 = np.where(np.isnan(data[0]), INF, data[0])
    if np.count_nonzero(np.isfinite(row0)) < 3:
        # fall back to the latest row that can seed a step
        counts = np.count_nonzero(~np.isnan(data), axis=1)
        good = np.nonzero(counts >= 3)[0]
        if good.size == 0:
            raise InsufficientDataError("fewer than three finite boundary values")
        start = int(good[0])
        data = data[start:]
        times = times[start:]
        K -= start
        row0 = np.where(np.isnan(data[0]), INF, data[0])

    patch = SidewaysPatch(
        rep=rep,
        a=a,
        z_vals=z_vals,
        t0=times[0],
        h=h,
        theta=theta,
        s=s,
        chi=[row0],
        times=list(times),
        data={r: data[r] for r in range(1, K + 1)},
        anchor_l=s,
        anchor_row=K,
    )
    return patch


@dataclass(frozen=True)
class Crossing:
    psi: float
    normal3: tuple
    row: int


def _column(patch: SidewaysPatch, zf: float, r: int) -> float:
    row = patch.chi[r]
    lo = int(math.floor(zf))
    frac = zf - lo
    if frac < 1e-9:
        return row[lo] if 0 <= lo < row.shape[0] else INF
    if frac > 1 - 1e-9:
        return row[lo + 1] if 0 <= lo + 1 < row.shape[0] else INF
    if lo < 0 or lo + 1 >= row.shape[0]:
        return INF
    a, b = row[lo], row[lo + 1]
    if not (np.isfinite(a) and np.isfinite(b)):
        return INF
    return a + frac * (b - a)


def extract_crossing(patch: SidewaysPatch, target, start_row: int | None = None) -> Crossing | None:
    """First time the solved front crosses ``target`` = (x, y) at or after the anchor row."""
    w_t, z_t = skew_map(target[0], target[1], patch.theta)
    zf = (z_t - patch.z_vals[0]) / patch.h
    if zf < -1e-9 or zf > patch.z_vals.shape[0] - 1 + 1e-9:
        return None
    l_near = int(round(zf))
    r0 = patch.anchor_row if start_row is None else start_row
    for r in range(r0, patch.rows - 1):
        c0 = _column(patch, zf, r)
        c1 = _column(patch, zf, r + 1)
        if not (np.isfinite(c0) and np.isfinite(c1)):
            continue
        d0, d1 = c0 - w_t, c1 - w_t
        if d0 * d1 < 0 or (d1 == 0 and d0 != 0):
            t0, t1 = patch.times[r], patch.times[r + 1]
            psi = t0 + (w_t - c0) / (c1 - c0) * (t1 - t0)
            try:
                n3 = normal_from_sideways(patch, l_near, r + 1, strict=False)
            except ValueError:
                continue
            return Crossing(psi, n3, r)
    return None
