# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: area function, chain-matrix denominator, resonance scan.

Must stay numerically equivalent to ``_kernels_py``; see tests/test_kernels.py.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, fabs, pow, M_PI, signbit

cnp.import_array()

cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double complex cexp(double complex)
    double cabs(double complex)

cdef double RHO = 1.14e-3
cdef double MU = 1.86e-4
cdef double LAMBDA = 5.5e-5
cdef double CP = 0.24
cdef double ETA = 1.4
cdef double WALL_MASS = 1.5
cdef double WALL_RES = 1600.0
cdef double WALL_STIFF = 3.0e5
cdef double REFINE_TOL = 1e-3
cdef int MAX_REFINE_ITER = 100
cdef double PROMINENCE = 1.1220184543019633  # 1 dB


def area_function(x, const double[::1] mean, const double[:, ::1] basis, const double[::1] alpha,
                  const double[::1] beta, double scale, double a_min, double l_min):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t g = alpha.shape[0]
    cdef Py_ssize_t p = basis.shape[0]
    cdef Py_ssize_t i, k
    cdef double d, ln, a, s2 = scale * scale
    areas = np.empty(g)
    lengths = np.empty(g)
    cdef double[::1] av = areas
    cdef double[::1] lv = lengths
    for i in range(g):
        d = mean[i]
        ln = mean[g + i]
        for k in range(p):
            d += xv[k] * basis[k, i]
            ln += xv[k] * basis[k, g + i]
        if d < 0.0:
            d = 0.0
        a = alpha[i] * pow(d, beta[i]) * s2
        av[i] = a if a > a_min else a_min
        lv[i] = (ln if ln > l_min else l_min) * scale
    return areas, lengths


cdef inline double lossless_d(double f, const double* A, const double* L, Py_ssize_t n, double c) nogil:
    cdef double ka = 1.0, kb = 0.0, kc = 0.0, kd = 1.0
    cdef double th, cs, sn, z, a, b, cc, na, nb, nc, nd
    cdef double w = 2.0 * M_PI * f / c
    cdef Py_ssize_t i
    for i in range(n):
        th = w * L[i]
        cs = cos(th)
        sn = sin(th)
        z = RHO * c / A[i]
        b = z * sn
        cc = sn / z
        na = ka * cs - kb * cc
        nb = ka * b + kb * cs
        nc = kc * cs + kd * cc
        nd = kd * cs - kc * b
        ka = na; kb = nb; kc = nc; kd = nd
    return kd


cdef inline double complex lossy_den(double f, const double* A, const double* L, Py_ssize_t n, double c) nogil:
    cdef double complex ka = 1.0, kb = 0.0, kc = 0.0, kd = 1.0
    cdef double complex z, y, zw, gam, g1, zc, izc, e, ei, ch, sh, na, nb, nc, nd, zr
    cdef double omega = 2.0 * M_PI * f
    cdef double perim, area, rr, lr
    cdef double visc = sqrt(omega * RHO * MU / 2.0)
    cdef double therm = (ETA - 1.0) / (RHO * c * c) * sqrt(LAMBDA * omega / (2.0 * CP * RHO))
    cdef Py_ssize_t i
    zw = WALL_RES + 1j * (omega * WALL_MASS - WALL_STIFF / omega)
    for i in range(n):
        area = A[i]
        perim = 2.0 * sqrt(M_PI * area)
        z = perim / (area * area) * visc + 1j * (omega * RHO / area)
        y = perim * therm + 1j * (omega * area / (RHO * c * c)) + perim / zw
        g1 = csqrt(z * y)
        zc = z / g1
        izc = g1 / z
        e = cexp(g1 * L[i])
        ei = 1.0 / e
        ch = 0.5 * (e + ei)
        sh = 0.5 * (e - ei)
        na = ka * ch + kb * sh * izc
        nb = ka * zc * sh + kb * ch
        nc = kc * ch + kd * sh * izc
        nd = kc * zc * sh + kd * ch
        ka = na; kb = nb; kc = nc; kd = nd
    area = A[n - 1]
    rr = 128.0 * RHO * c / (9.0 * M_PI * M_PI * area)
    lr = 8.0 * RHO / (3.0 * M_PI * sqrt(M_PI * area))
    zr = 1j * omega * lr * rr / (rr + 1j * omega * lr)
    return kc * zr + kd


def tract_denominator(const double[::1] areas, const double[::1] lengths, freqs, double c, bint lossy):
    cdef double[::1] fv = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef Py_ssize_t m = fv.shape[0], n = areas.shape[0], k
    out = np.empty(m, dtype=np.complex128)
    cdef double complex[::1] ov = out
    for k in range(m):
        if lossy:
            ov[k] = lossy_den(fv[k], &areas[0], &lengths[0], n, c)
        else:
            ov[k] = lossless_d(fv[k], &areas[0], &lengths[0], n, c)
    return out


cdef double illinois(double lo, double hi, double flo, double fhi,
                     const double* A, const double* L, Py_ssize_t n, double c) nogil:
    # bracketed regula falsi; the retained endpoint is halved on repeats
    cdef int side = 0, it
    cdef double x, fx
    for it in range(MAX_REFINE_ITER):
        if hi - lo <= REFINE_TOL:
            break
        x = (lo * fhi - hi * flo) / (fhi - flo)
        if not (lo < x < hi):
            x = 0.5 * (lo + hi)
        fx = lossless_d(x, A, L, n, c)
        if fx == 0.0:
            return x
        if signbit(fx) == signbit(flo):
            lo = x
            flo = fx
            if side == -1:
                fhi *= 0.5
            side = -1
        else:
            hi = x
            fhi = fx
            if side == 1:
                flo *= 0.5
            side = 1
    return 0.5 * (lo + hi)


cdef Py_ssize_t scan_lossless(const double* A, const double* L, Py_ssize_t n, double c,
                              double step, Py_ssize_t ngrid, Py_ssize_t nmax, double* out) nogil:
    # rotation recurrence on the uniform grid; exact evaluations only in refinement
    cdef double cs_step[256]
    cdef double sn_step[256]
    cdef double cs_cur[256]
    cdef double sn_cur[256]
    cdef double z[256]
    cdef Py_ssize_t i, k, found = 0
    cdef double th, ka, kb, kc, kd, b, cc, na, nb, nc, nd, cs, sn, prev = 0.0
    for i in range(n):
        th = 2.0 * M_PI * step * L[i] / c
        cs_step[i] = cos(th)
        sn_step[i] = sin(th)
        cs_cur[i] = cs_step[i]
        sn_cur[i] = sn_step[i]
        z[i] = RHO * c / A[i]
    for k in range(ngrid):
        ka = 1.0; kb = 0.0; kc = 0.0; kd = 1.0
        for i in range(n):
            cs = cs_cur[i]
            sn = sn_cur[i]
            b = z[i] * sn
            cc = sn / z[i]
            na = ka * cs - kb * cc
            nb = ka * b + kb * cs
            nc = kc * cs + kd * cc
            nd = kd * cs - kc * b
            ka = na; kb = nb; kc = nc; kd = nd
            cs_cur[i] = cs * cs_step[i] - sn * sn_step[i]
            sn_cur[i] = sn * cs_step[i] + cs * sn_step[i]
        if k > 0 and signbit(prev) != signbit(kd):
            out[found] = illinois(step * k, step * (k + 1), prev, kd, A, L, n, c)
            found += 1
            if found == nmax:
                return found
        prev = kd
    return found


cdef Py_ssize_t scan_lossy(const double* A, const double* L, Py_ssize_t n, double c,
                           double step, Py_ssize_t ngrid, Py_ssize_t nmax, double* out) nogil:
    cdef double m0, m1, m2, runmax
    cdef Py_ssize_t k, found = 0
    cdef double lo, hi, x1, x2, f1, f2, invphi = (sqrt(5.0) - 1.0) / 2.0
    if ngrid < 3:
        return 0
    m0 = cabs(lossy_den(step, A, L, n, c))
    m1 = cabs(lossy_den(2.0 * step, A, L, n, c))
    runmax = m0 if m0 > m1 else m1
    for k in range(2, ngrid):
        m2 = cabs(lossy_den(step * (k + 1), A, L, n, c))
        if m1 < m0 and m1 <= m2 and runmax >= PROMINENCE * m1:
            lo = step * (k - 1)
            hi = step * (k + 1)
            x1 = hi - invphi * (hi - lo)
            x2 = lo + invphi * (hi - lo)
            f1 = cabs(lossy_den(x1, A, L, n, c))
            f2 = cabs(lossy_den(x2, A, L, n, c))
            while hi - lo > REFINE_TOL:
                if f1 < f2:
                    hi = x2
                    x2 = x1
                    f2 = f1
                    x1 = hi - invphi * (hi - lo)
                    f1 = cabs(lossy_den(x1, A, L, n, c))
                else:
                    lo = x1
                    x1 = x2
                    f1 = f2
                    x2 = lo + invphi * (hi - lo)
                    f2 = cabs(lossy_den(x2, A, L, n, c))
            out[found] = 0.5 * (lo + hi)
            found += 1
            if found == nmax:
                return found
            runmax = m1
        if m2 > runmax:
            runmax = m2
        m0 = m1
        m1 = m2
    return found


def tract_resonances(const double[::1] areas, const double[::1] lengths, double c, bint lossy,
                     double step, double fmax, Py_ssize_t nmax):
    cdef Py_ssize_t n = areas.shape[0]
    cdef Py_ssize_t ngrid = <Py_ssize_t>(fmax / step)
    if n > 256:
        raise ValueError("at most 256 tube sections supported")
    out = np.empty(nmax)
    cdef double[::1] ov = out
    cdef Py_ssize_t found
    if nmax == 0 or n == 0:
        return out[:0]
    if lossy:
        found = scan_lossy(&areas[0], &lengths[0], n, c, step, ngrid, nmax, &ov[0])
    else:
        found = scan_lossless(&areas[0], &lengths[0], n, c, step, ngrid, nmax, &ov[0])
    return out[:found]
