"""Pure-Python reference versions of the numerical kernels.

Every function here has a twin with the same signature in ``_kernels.pyx``.
``frontweave.kernels`` picks the compiled one when it imports cleanly.
"""
import math

import numpy as np

INF = math.inf

_N_BRACKETS = 64
_BISECT_ITERS = 48


def fmm_update(u, v, h, f):
    """Classical two-sided upwind update; ``f`` must be nonzero."""
    if u == INF and v == INF:
        return INF
    tau = h / abs(f)
    lo = min(u, v)
    hi = max(u, v)
    if hi - lo < tau:
        return 0.5 * ((u + v) + math.sqrt(2.0 * tau * tau - (u - v) * (u - v)))
    return lo + tau


def _f(lam, pv, pu, tv, tu):
    s = math.sqrt(lam * lam + (1.0 - lam) * (1.0 - lam))
    return lam * pv + (1.0 - lam) * pu + s * (lam * tv + (1.0 - lam) * tu)


def quartic_coeffs(pv, pu, tv, tu):
    """Coefficients (c4..c0) of the quartic whose roots hold the stationary points."""
    dpsi = pv - pu
    dtau = tv - tu
    p2 = 4.0 * dtau
    p1 = 2.0 * tu - 3.0 * dtau
    p0 = dtau - tu
    d2 = dpsi * dpsi
    return (
        p2 * p2,
        2.0 * p2 * p1,
        p1 * p1 + 2.0 * p2 * p0 - 2.0 * d2,
        2.0 * p1 * p0 + 2.0 * d2,
        p0 * p0 - d2,
    )


def _g(lam, dpsi, p2, p1, p0):
    # S * f'(lam); shares its roots with the quartic minus the squaring artefacts
    s = math.sqrt(2.0 * lam * lam - 2.0 * lam + 1.0)
    return dpsi * s + (p2 * lam + p1) * lam + p0


def quadrant_minimize(pv, pu, tv, tu):
    """Minimize the interpolated travel time over one quadrant.

    Returns ``(value, xi)``; ``xi`` is 1 when only the v-neighbour is used,
    0 when only the u-neighbour is used, and in (0, 1) for a 2-D update.
    Interior minima below ``max(pv, pu)`` are discarded.
    """
    v_ok = pv < INF and tv < INF
    u_ok = pu < INF and tu < INF
    if not v_ok and not u_ok:
        return INF, math.nan
    if not u_ok:
        return pv + tv, 1.0
    if not v_ok:
        return pu + tu, 0.0

    best = pu + tu
    best_xi = 0.0
    if pv + tv < best:
        best = pv + tv
        best_xi = 1.0

    dpsi = pv - pu
    dtau = tv - tu
    p2 = 4.0 * dtau
    p1 = 2.0 * tu - 3.0 * dtau
    p0 = dtau - tu
    floor = max(pv, pu)

    a = 0.0
    ga = _g(a, dpsi, p2, p1, p0)
    for k in range(1, _N_BRACKETS + 1):
        b = k / _N_BRACKETS
        gb = _g(b, dpsi, p2, p1, p0)
        # f' goes from negative to positive: a local minimum
        if ga < 0.0 <= gb and not (k == _N_BRACKETS and gb == 0.0):
            lo, hi = a, b
            for _ in range(_BISECT_ITERS):
                mid = 0.5 * (lo + hi)
                if _g(mid, dpsi, p2, p1, p0) < 0.0:
                    lo = mid
                else:
                    hi = mid
            lam = 0.5 * (lo + hi)
            if 0.0 < lam < 1.0:
                val = _f(lam, pv, pu, tv, tu)
                if val >= floor and val < best:
                    best = val
                    best_xi = lam
        a, ga = b, gb
    return best, best_xi


def upw(dm, dp, alpha):
    """Upwind selection of squared one-sided slopes, switched by ``alpha``."""
    out = 0.0
    if alpha > 0:
        a = min(dp, 0.0)
        b = max(dm, 0.0)
        out += alpha * (a * a + b * b)
    elif alpha < 0:
        a = max(dp, 0.0)
        b = min(dm, 0.0)
        out -= alpha * (a * a + b * b)
    return out


def sideways_row(chi, fvals, a, h, dt):
    """One explicit step of the sideways scheme over a whole row."""
    chi = np.asarray(chi, dtype=np.float64)
    fvals = np.asarray(fvals, dtype=np.float64)
    n = chi.shape[0]
    out = np.full(n, INF)
    for l in range(1, n - 1):
        c = chi[l]
        left = chi[l - 1]
        right = chi[l + 1]
        if c == INF or left == INF or right == INF:
            continue
        f = fvals[l]
        af = a * f
        alpha = 1.0 if af > 0 else (-1.0 if af < 0 else 0.0)
        dp = (right - c) / h
        dm = (c - left) / h
        out[l] = c - a * dt * f * math.sqrt(1.0 + upw(dm, dp, alpha))
    return out


def scheme_g(b, c, d, a, f, dt, h):
    """The update map G(b, c, d) for frozen speed ``f``."""
    af = a * f
    alpha = 1.0 if af > 0 else (-1.0 if af < 0 else 0.0)
    return c - a * dt * f * math.sqrt(1.0 + upw((c - b) / h, (d - c) / h, alpha))


def xi_scan_min(pv, pu, tv, tu, n):
    """Brute-force quadrant minimum over ``n`` uniform xi samples.

    Interior samples count only when they are discrete local minima whose
    value is at least ``max(pv, pu)``; the two endpoints always count.
    """
    v_ok = pv < INF and tv < INF
    u_ok = pu < INF and tu < INF
    if not v_ok and not u_ok:
        return INF
    if not u_ok:
        return pv + tv
    if not v_ok:
        return pu + tu
    floor = max(pv, pu)
    best = min(pu + tu, pv + tv)
    chunk = 1 << 18
    for start in range(1, n - 1, chunk):
        stop = min(n - 1, start + chunk)
        lam = np.arange(start - 1, stop + 1, dtype=np.float64) / (n - 1)
        vals = lam * pv + (1.0 - lam) * pu + np.sqrt(lam * lam + (1.0 - lam) ** 2) * (
            lam * tv + (1.0 - lam) * tu
        )
        mid = vals[1:-1]
        ok = (mid <= vals[:-2]) & (mid <= vals[2:]) & (mid >= floor)
        if ok.any():
            best = min(best, float(mid[ok].min()))
    return best


def _minmod(a, b):
    return np.where(a * b > 0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def _one_sided(p, axis, h):
    q = np.moveaxis(p, axis, 0)
    d1 = (q[1:] - q[:-1]) / h
    d2 = (q[2:] - 2 * q[1:-1] + q[:-2]) / h
    n = q.shape[0] - 4
    dm = d1[1 : n + 1] + 0.5 * _minmod(d2[0:n], d2[1 : n + 1])
    dp = d1[2 : n + 2] - 0.5 * _minmod(d2[1 : n + 1], d2[2 : n + 2])
    dm, dp = dm[:, 2:-2], dp[:, 2:-2]
    return np.moveaxis(dm, 0, axis), np.moveaxis(dp, 0, axis)


def godunov_norm(p, f, h):
    """Upwind |grad phi| from second-order one-sided differences.

    ``p`` carries two ghost layers on every side; ``f`` has the interior shape.
    The Godunov flux picks the differences by the sign of ``f``.
    """
    p = np.asarray(p, dtype=float)
    dxm, dxp = _one_sided(p, 0, h)
    dym, dyp = _one_sided(p, 1, h)
    pos = np.sqrt(
        np.maximum(dxm, 0) ** 2 + np.minimum(dxp, 0) ** 2 + np.maximum(dym, 0) ** 2 + np.minimum(dyp, 0) ** 2
    )
    neg = np.sqrt(
        np.minimum(dxm, 0) ** 2 + np.maximum(dxp, 0) ** 2 + np.minimum(dym, 0) ** 2 + np.maximum(dyp, 0) ** 2
    )
    return np.where(np.asarray(f) > 0, pos, neg)
