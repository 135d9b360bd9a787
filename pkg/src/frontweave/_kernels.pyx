# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot numerical kernels.

Signatures and results match ``_pykernels`` exactly.
"""
from libc.math cimport sqrt, fabs, INFINITY, NAN

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef int N_BRACKETS = 64
cdef int BISECT_ITERS = 48


cpdef double fmm_update(double u, double v, double h, double f):
    cdef double tau, lo, hi
    if u == INFINITY and v == INFINITY:
        return INFINITY
    tau = h / fabs(f)
    lo = u if u < v else v
    hi = v if u < v else u
    if hi - lo < tau:
        return 0.5 * ((u + v) + sqrt(2.0 * tau * tau - (u - v) * (u - v)))
    return lo + tau


cdef inline double _f(double lam, double pv, double pu, double tv, double tu) nogil:
    cdef double s = sqrt(lam * lam + (1.0 - lam) * (1.0 - lam))
    return lam * pv + (1.0 - lam) * pu + s * (lam * tv + (1.0 - lam) * tu)


cdef inline double _g(double lam, double dpsi, double p2, double p1, double p0) nogil:
    cdef double s = sqrt(2.0 * lam * lam - 2.0 * lam + 1.0)
    return dpsi * s + (p2 * lam + p1) * lam + p0


def quartic_coeffs(double pv, double pu, double tv, double tu):
    cdef double dpsi = pv - pu, dtau = tv - tu
    cdef double p2 = 4.0 * dtau, p1 = 2.0 * tu - 3.0 * dtau, p0 = dtau - tu
    cdef double d2 = dpsi * dpsi
    return (p2 * p2, 2.0 * p2 * p1, p1 * p1 + 2.0 * p2 * p0 - 2.0 * d2,
            2.0 * p1 * p0 + 2.0 * d2, p0 * p0 - d2)


cdef void _qmin(double pv, double pu, double tv, double tu,
                double* out_val, double* out_xi) nogil:
    cdef bint v_ok = pv < INFINITY and tv < INFINITY
    cdef bint u_ok = pu < INFINITY and tu < INFINITY
    cdef double best, best_xi, dpsi, dtau, p2, p1, p0, floor
    cdef double a, ga, b, gb, lo, hi, mid, lam, val
    cdef int k, it
    if not v_ok and not u_ok:
        out_val[0] = INFINITY
        out_xi[0] = NAN
        return
    if not u_ok:
        out_val[0] = pv + tv
        out_xi[0] = 1.0
        return
    if not v_ok:
        out_val[0] = pu + tu
        out_xi[0] = 0.0
        return
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
    floor = pv if pv > pu else pu
    a = 0.0
    ga = _g(a, dpsi, p2, p1, p0)
    for k in range(1, N_BRACKETS + 1):
        b = <double>k / N_BRACKETS
        gb = _g(b, dpsi, p2, p1, p0)
        if ga < 0.0 <= gb and not (k == N_BRACKETS and gb == 0.0):
            lo = a
            hi = b
            for it in range(BISECT_ITERS):
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
        a = b
        ga = gb
    out_val[0] = best
    out_xi[0] = best_xi


def quadrant_minimize(double pv, double pu, double tv, double tu):
    cdef double val, xi
    _qmin(pv, pu, tv, tu, &val, &xi)
    return val, xi


cdef inline double _upw(double dm, double dp, double alpha) nogil:
    cdef double out = 0.0, a, b
    if alpha > 0:
        a = dp if dp < 0.0 else 0.0
        b = dm if dm > 0.0 else 0.0
        out += alpha * (a * a + b * b)
    elif alpha < 0:
        a = dp if dp > 0.0 else 0.0
        b = dm if dm < 0.0 else 0.0
        out -= alpha * (a * a + b * b)
    return out


cpdef double upw(double dm, double dp, double alpha):
    return _upw(dm, dp, alpha)


def sideways_row(chi_in, fvals_in, double a, double h, double dt):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] chi = np.ascontiguousarray(chi_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fv = np.ascontiguousarray(fvals_in, dtype=np.float64)
    cdef Py_ssize_t n = chi.shape[0], l
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.full(n, np.inf)
    cdef double c, left, right, f, af, alpha, dp, dm
    for l in range(1, n - 1):
        c = chi[l]
        left = chi[l - 1]
        right = chi[l + 1]
        if c == INFINITY or left == INFINITY or right == INFINITY:
            continue
        f = fv[l]
        af = a * f
        alpha = 1.0 if af > 0 else (-1.0 if af < 0 else 0.0)
        dp = (right - c) / h
        dm = (c - left) / h
        out[l] = c - a * dt * f * sqrt(1.0 + _upw(dm, dp, alpha))
    return out


cpdef double scheme_g(double b, double c, double d, double a, double f, double dt, double h):
    cdef double af = a * f
    cdef double alpha = 1.0 if af > 0 else (-1.0 if af < 0 else 0.0)
    return c - a * dt * f * sqrt(1.0 + _upw((c - b) / h, (d - c) / h, alpha))


cpdef double xi_scan_min(double pv, double pu, double tv, double tu, long n):
    cdef bint v_ok = pv < INFINITY and tv < INFINITY
    cdef bint u_ok = pu < INFINITY and tu < INFINITY
    cdef double floor, best, f0, f1, f2, lam
    cdef long i
    if not v_ok and not u_ok:
        return INFINITY
    if not u_ok:
        return pv + tv
    if not v_ok:
        return pu + tu
    floor = pv if pv > pu else pu
    best = pu + tu if pu + tu < pv + tv else pv + tv
    f0 = _f(0.0, pv, pu, tv, tu)
    f1 = _f(1.0 / (n - 1), pv, pu, tv, tu)
    with nogil:
        for i in range(1, n - 1):
            lam = <double>(i + 1) / (n - 1)
            f2 = _f(lam, pv, pu, tv, tu)
            if f1 <= f0 and f1 <= f2 and f1 >= floor and f1 < best:
                best = f1
            f0 = f1
            f1 = f2
    return best


cdef inline double _minmod(double a, double b) nogil:
    if a * b > 0:
        return a if fabs(a) < fabs(b) else b
    return 0.0


def godunov_norm(p_in, f_in, double h):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.ascontiguousarray(p_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] f = np.ascontiguousarray(f_in, dtype=np.float64)
    cdef Py_ssize_t nx = p.shape[0] - 4, ny = p.shape[1] - 4, i, j, I, J
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nx, ny))
    cdef double c, xm, xp, ym, yp, a, b, s
    with nogil:
        for i in range(nx):
            I = i + 2
            for j in range(ny):
                J = j + 2
                c = p[I, J]
                a = (p[I, J] - 2 * p[I - 1, J] + p[I - 2, J]) / h
                b = (p[I + 1, J] - 2 * p[I, J] + p[I - 1, J]) / h
                xm = (c - p[I - 1, J]) / h + 0.5 * _minmod(a, b)
                xp = (p[I + 1, J] - c) / h - 0.5 * _minmod(b, (p[I + 2, J] - 2 * p[I + 1, J] + c) / h)
                a = (p[I, J] - 2 * p[I, J - 1] + p[I, J - 2]) / h
                b = (p[I, J + 1] - 2 * p[I, J] + p[I, J - 1]) / h
                ym = (c - p[I, J - 1]) / h + 0.5 * _minmod(a, b)
                yp = (p[I, J + 1] - c) / h - 0.5 * _minmod(b, (p[I, J + 2] - 2 * p[I, J + 1] + c) / h)
                if f[i, j] > 0:
                    xm = xm if xm > 0 else 0.0
                    xp = xp if xp < 0 else 0.0
                    ym = ym if ym > 0 else 0.0
                    yp = yp if yp < 0 else 0.0
                else:
                    xm = xm if xm < 0 else 0.0
                    xp = xp if xp > 0 else 0.0
                    ym = ym if ym < 0 else 0.0
                    yp = yp if yp > 0 else 0.0
                s = xm * xm + xp * xp + ym * ym + yp * yp
                out[i, j] = sqrt(s)
    return out
