# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled orbit kernels; mirrors ``_pykernels`` operation for operation."""
import numpy as np

from libc.math cimport sin, cos, log, pow, floor, hypot, exp

NAME = "cython"

cdef double TWO_PI = 6.283185307179586


def orbit(double x0, double y0, Py_ssize_t n, Py_ssize_t transient,
          double delta, double K, double A, double lam):
    cdef double[::1] xs = np.empty(n)
    cdef double[::1] ys = np.empty(n)
    cdef double x = x0, y = y0, u
    cdef Py_ssize_t i, j, total = transient + n
    for i in range(total):
        u = y + A + lam * sin(x)
        if not u > 0.0:
            j = i - transient
            if j < 0:
                j = 0
            return np.asarray(xs)[:j], np.asarray(ys)[:j], i
        x = x - K * log(u)
        x = x - TWO_PI * floor(x / TWO_PI)
        y = pow(u, delta)
        if i >= transient:
            xs[i - transient] = x
            ys[i - transient] = y
    return np.asarray(xs), np.asarray(ys), -1


def rotation(double x0, double y0, Py_ssize_t n, Py_ssize_t transient,
             double delta, double K, double A, double lam):
    cdef double x = x0, y = y0, u, inc, t, v
    cdef double s = 0.0, comp = 0.0, s_half = 0.0
    cdef Py_ssize_t i, half = n // 2
    for i in range(transient + n):
        u = y + A + lam * sin(x)
        if not u > 0.0:
            return s_half, s, i
        inc = -K * log(u)
        if i >= transient:
            t = inc - comp
            v = s + t
            comp = (v - s) - t
            s = v
            if i - transient + 1 == half:
                s_half = s
        x = x + inc
        x = x - TWO_PI * floor(x / TWO_PI)
        y = pow(u, delta)
    return s_half, s, -1


def lyapunov(double x0, double y0, Py_ssize_t n, Py_ssize_t transient,
             double delta, double K, double A, double lam):
    cdef double x = x0, y = y0
    cdef double q11 = 1.0, q21 = 0.0, q12 = 0.0, q22 = 1.0
    cdef double s1 = 0.0, s2 = 0.0, sd = 0.0
    cdef double dm1 = delta - 1.0
    cdef double sx, cx, u, up, d11, d12, d21, d22
    cdef double v11, v21, v12, v22, r11, r12, r22, w1, w2
    cdef Py_ssize_t i, n_done = 0
    for i in range(transient + n):
        sx = sin(x)
        cx = cos(x)
        u = y + A + lam * sx
        if not u > 0.0:
            return s1, s2, sd, n_done, i, x, y
        up = pow(u, dm1)
        d11 = 1.0 - K * lam * cx / u
        d12 = -K / u
        d21 = delta * lam * cx * up
        d22 = delta * up
        v11 = d11 * q11 + d12 * q21
        v21 = d21 * q11 + d22 * q21
        v12 = d11 * q12 + d12 * q22
        v22 = d21 * q12 + d22 * q22
        r11 = hypot(v11, v21)
        q11 = v11 / r11
        q21 = v21 / r11
        r12 = q11 * v12 + q21 * v22
        w1 = v12 - r12 * q11
        w2 = v22 - r12 * q21
        r22 = hypot(w1, w2)
        q12 = w1 / r22
        q22 = w2 / r22
        if i >= transient:
            s1 += log(r11)
            s2 += log(r22)
            sd += log(delta * up)
            n_done += 1
        x = x - K * log(u)
        x = x - TWO_PI * floor(x / TWO_PI)
        y = pow(u, delta)
    return s1, s2, sd, n_done, -1, x, y


cdef inline void _hopf_rhs(double r, double z, double mu1, double mu2,
                           double a, double c, double d, double e, double f,
                           bint logr, double* dr, double* dz) noexcept nogil:
    cdef double rr
    if logr:
        rr = exp(2.0 * r)
        dr[0] = mu1 + a * z + c * rr + d * z * z
    else:
        rr = r * r
        dr[0] = mu1 * r + a * r * z + c * r * rr + d * r * z * z
    dz[0] = mu2 - rr - z * z + e * rr * z + f * z * z * z


def hopf_rk4(double r0, double z0, double h, Py_ssize_t nsteps,
             double mu1, double mu2, double a, double c, double d, double e,
             double f, bint logr):
    cdef double[::1] rs = np.empty(nsteps + 1)
    cdef double[::1] zs = np.empty(nsteps + 1)
    cdef double r = r0, z = z0, hh = 0.5 * h
    cdef double cr = 0.0, cz = 0.0, yr, yz, tr, tz
    cdef double k1r, k1z, k2r, k2z, k3r, k3z, k4r, k4z
    cdef Py_ssize_t i
    rs[0] = r
    zs[0] = z
    for i in range(nsteps):
        _hopf_rhs(r, z, mu1, mu2, a, c, d, e, f, logr, &k1r, &k1z)
        _hopf_rhs(r + hh * k1r, z + hh * k1z, mu1, mu2, a, c, d, e, f, logr, &k2r, &k2z)
        _hopf_rhs(r + hh * k2r, z + hh * k2z, mu1, mu2, a, c, d, e, f, logr, &k3r, &k3z)
        _hopf_rhs(r + h * k3r, z + h * k3z, mu1, mu2, a, c, d, e, f, logr, &k4r, &k4z)
        yr = h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r) - cr
        tr = r + yr
        cr = (tr - r) - yr
        r = tr
        yz = h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z) - cz
        tz = z + yz
        cz = (tz - z) - yz
        z = tz
        rs[i + 1] = r
        zs[i + 1] = z
    return np.asarray(rs), np.asarray(zs)
