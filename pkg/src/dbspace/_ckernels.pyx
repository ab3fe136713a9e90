# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation kernels; mirrors ``_pykernels`` on flat arrays."""

import numpy as np
cimport numpy as cnp
from libc.math cimport (atan2, cos, sin, exp, expm1, log, log1p, hypot,
                        fabs, fmod, M_PI, INFINITY)

cnp.import_array()

ctypedef double complex cplx


cdef inline double _wrap(double phi) noexcept nogil:
    cdef double r = fmod(phi + M_PI, 2.0 * M_PI)
    if r < 0:
        r += 2.0 * M_PI
    return r - M_PI


cdef inline cplx _clog1p(cplx u) noexcept nogil:
    cdef double x = u.real, y = u.imag, re
    if hypot(x, y) < 0.5:
        re = 0.5 * log1p(x * (2.0 + x) + y * y)
    else:
        re = log(hypot(1.0 + x, y))
    return re + 1j * atan2(y, 1.0 + x)


cdef inline cplx _cexpm1(cplx g) noexcept nogil:
    cdef double x = g.real, y = g.imag, sh = sin(0.5 * y)
    cdef double re = expm1(x) * cos(y) - 2.0 * sh * sh
    cdef double im = exp(x) * sin(y)
    return re + 1j * im


cdef inline cplx _cexp(cplx g) noexcept nogil:
    cdef double r = exp(g.real)
    return r * cos(g.imag) + 1j * r * sin(g.imag)


cdef inline cplx _log_theta1(cplx z, double a, const cplx[::1] zeros,
                             double phase0) noexcept nogil:
    cdef double x = z.real, y = z.imag, p, q, dx, den
    cdef double re = -2.0 * a * y, im = phase0 + 2.0 * a * x
    cdef Py_ssize_t k
    cdef cplx u
    for k in range(zeros.shape[0]):
        p = zeros[k].real
        q = -zeros[k].imag
        dx = x - p
        den = dx * dx + (y + q) * (y + q)
        re += 0.5 * log1p(-4.0 * y * q / den)
        u = (-2j * q) / (z - zeros[k])
        im += atan2(u.imag, 1.0 + u.real)
    return re + 1j * _wrap(im)


def log_theta(const cplx[::1] z, double a, const cplx[::1] zeros, double phase0):
    cdef Py_ssize_t i, n = z.shape[0]
    out = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _log_theta1(z[i], a, zeros, phase0)
    return out


def log_abs_e(const cplx[::1] z, double a, const cplx[::1] zeros, double logk):
    cdef Py_ssize_t i, k, n = z.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc
    with nogil:
        for i in range(n):
            acc = logk + a * z[i].imag
            for k in range(zeros.shape[0]):
                acc += log(hypot(z[i].real - zeros[k].real,
                                 z[i].imag - zeros[k].imag))
            o[i] = acc
    return out


def arg_e(const cplx[::1] z, double a, const cplx[::1] zeros, double argk):
    cdef Py_ssize_t i, k, n = z.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc
    with nogil:
        for i in range(n):
            acc = argk - _wrap(a * z[i].real)
            for k in range(zeros.shape[0]):
                acc += atan2(z[i].imag - zeros[k].imag,
                             z[i].real - zeros[k].real)
            o[i] = _wrap(acc)
    return out


cdef cplx _root_slope(cplx c, double a, const cplx[::1] zeros, double phase0) noexcept:
    # Theta'(c) at a zero c of Theta
    cdef Py_ssize_t k, hits = 0, nk = zeros.shape[0]
    cdef double x = c.real, y = c.imag, p, q, dx, den
    cdef double re = -2.0 * a * y, im = phase0 + 2.0 * a * x
    cdef cplx u, zhit = 0
    for k in range(nk):
        if zeros[k].real == c.real and -zeros[k].imag == c.imag:
            hits += 1
            zhit = zeros[k]
            continue
        p = zeros[k].real
        q = -zeros[k].imag
        dx = x - p
        den = dx * dx + (y + q) * (y + q)
        re += 0.5 * log1p(-4.0 * y * q / den)
        u = (-2j * q) / (c - zeros[k])
        im += atan2(u.imag, 1.0 + u.real)
    if hits > 1:
        return 0
    return exp(re) * (cos(im) + 1j * sin(im)) / (c - zhit)


cdef cplx _s_logsum(cplx h, cplx c, double a, const cplx[::1] zeros,
                    bint lower, cplx thc) noexcept nogil:
    # log-sum form; used where the product form would overflow
    cdef cplx g = 2j * a * h, zk, zkb
    cdef Py_ssize_t k
    for k in range(zeros.shape[0]):
        zk = zeros[k]
        zkb = zk.real - 1j * zk.imag
        g = g + _clog1p(h / (c - zkb)) - _clog1p(h / (c - zk))
    if not lower:
        return _cexpm1(g) / h
    if g.real > 0:
        # Theta(z) (1 - exp(-g)) / h avoids overflow times underflow
        return -_cexpm1(-g) * _cexp(thc + g) / h
    return _cexpm1(g) * _cexp(thc) / h


def s_matrix(const cplx[::1] w, const cplx[::1] z, double a,
             const cplx[::1] zeros, double phase0):
    cdef Py_ssize_t i, j, k, nw = w.shape[0], nz = z.shape[0]
    cdef Py_ssize_t nk = zeros.shape[0]
    out = np.empty((nz, nw), dtype=np.complex128)
    cdef cplx[:, ::1] o = out
    cdef cplx c, h, deriv, zk, zkb, thc, slope = 0, u, v, pm1, val, eth
    cdef bint lower, pole, root, ok
    hit_arr = np.zeros(nz, dtype=np.uint8)
    cdef unsigned char[::1] zhit = hit_arr
    ehit_arr = np.zeros(nz, dtype=np.uint8)
    cdef unsigned char[::1] ehit = ehit_arr
    zinv_arr = np.zeros((nz, max(nk, 1)), dtype=np.complex128)
    cdef cplx[:, ::1] zinv = zinv_arr
    cb_arr = np.zeros(max(nk, 1), dtype=np.complex128)
    cdef cplx[::1] cb = cb_arr
    for i in range(nz):
        for k in range(nk):
            if z[i].real == zeros[k].real and z[i].imag == -zeros[k].imag:
                zhit[i] = 1
            if z[i] == zeros[k]:
                ehit[i] = 1
            else:
                zinv[i, k] = 1.0 / (z[i] - zeros[k])
    with nogil:
        for j in range(nw):
            c = w[j].real - 1j * w[j].imag
            lower = w[j].imag < 0
            pole = False
            root = False
            deriv = 2j * a
            for k in range(nk):
                zk = zeros[k]
                zkb = zk.real - 1j * zk.imag
                if c == zk:
                    pole = True
                if c == zkb:
                    root = True
                deriv = deriv + 1.0 / (c - zkb) - 1.0 / (c - zk)
                if c != zkb:
                    cb[k] = (zkb - zk) / (c - zkb)
            thc = 0
            eth = 0
            if lower and root:
                with gil:
                    slope = _root_slope(c, a, zeros, phase0)
            if lower and not root:
                thc = _log_theta1(c, a, zeros, phase0)
                eth = _cexp(thc)
            for i in range(nz):
                h = z[i] - c
                if lower and root and h == 0:
                    o[i, j] = slope
                    continue
                if lower and root:
                    o[i, j] = _cexp(_log_theta1(z[i], a, zeros, phase0)) / h
                    continue
                if (not lower) and pole:
                    o[i, j] = -1.0 / h
                    continue
                if h == 0:
                    o[i, j] = deriv * eth if lower else deriv
                    continue
                if lower and zhit[i]:
                    # Theta(z) = 0 exactly at its zeros
                    o[i, j] = -eth / h
                    continue
                ok = not ehit[i]
                if ok:
                    # Theta(z)/Theta(c) = exp(2iah) prod(1 + v_k), accumulated
                    # as u = prod - 1 so that small h keeps full precision
                    u = 0
                    for k in range(nk):
                        v = h * cb[k] * zinv[i, k]
                        u = u + v + u * v
                    pm1 = _cexpm1(2j * a * h) * (1.0 + u) + u
                    ok = fabs(pm1.real) < 1e250 and fabs(pm1.imag) < 1e250
                    if ok and lower:
                        ok = thc.real > -600.0
                if ok:
                    val = pm1 / h
                    o[i, j] = val * eth if lower else val
                else:
                    o[i, j] = _s_logsum(h, c, a, zeros, lower, thc)
    return out
