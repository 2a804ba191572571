"""Pure-Python orbit kernels.

Same signatures and operation order as the compiled ``_ckernels`` module, so
both backends produce the same floating point results on the same libm.
"""
import math

import numpy as np

NAME = "python"

_TWO_PI = 2.0 * math.pi


def orbit(x0, y0, n, transient, delta, K, A, lam):
    """Iterate the return map; returns ``(xs, ys, escape_index)``.

    ``escape_index`` counts completed iterations (transient included) before
    the log argument became non-positive, or is -1.
    """
    xs = np.empty(n)
    ys = np.empty(n)
    x = x0
    y = y0
    total = transient + n
    for i in range(total):
        u = y + A + lam * math.sin(x)
        if not u > 0.0:
            j = max(i - transient, 0)
            return xs[:j], ys[:j], i
        x = x - K * math.log(u)
        x = x - _TWO_PI * math.floor(x / _TWO_PI)
        y = u ** delta
        if i >= transient:
            xs[i - transient] = x
            ys[i - transient] = y
    return xs, ys, -1


def rotation(x0, y0, n, transient, delta, K, A, lam):
    """Lifted angular increments summed over ``n // 2`` and ``n`` iterates.

    Returns ``(sum_half, sum_full, escape_index)``; sums are compensated.
    """
    x = x0
    y = y0
    s = 0.0
    comp = 0.0
    s_half = 0.0
    half = n // 2
    for i in range(transient + n):
        u = y + A + lam * math.sin(x)
        if not u > 0.0:
            return s_half, s, i
        inc = -K * math.log(u)
        if i >= transient:
            t = inc - comp
            v = s + t
            comp = (v - s) - t
            s = v
            if i - transient + 1 == half:
                s_half = s
        x = x + inc
        x = x - _TWO_PI * math.floor(x / _TWO_PI)
        y = u ** delta
    return s_half, s, -1


def lyapunov(x0, y0, n, transient, delta, K, A, lam):
    """Tangent-frame propagation with Gram-Schmidt re-orthonormalization.

    The frame is evolved through the transient without accumulating, so the
    recorded part starts aligned with the dominant direction. Returns
    ``(sum_log_r11, sum_log_r22, sum_log_det, n_done, escape_index, x, y)``.
    """
    x = x0
    y = y0
    q11 = 1.0
    q21 = 0.0
    q12 = 0.0
    q22 = 1.0
    s1 = 0.0
    s2 = 0.0
    sd = 0.0
    dm1 = delta - 1.0
    n_done = 0
    for i in range(transient + n):
        sx = math.sin(x)
        cx = math.cos(x)
        u = y + A + lam * sx
        if not u > 0.0:
            return s1, s2, sd, n_done, i, x, y
        up = u ** dm1
        d11 = 1.0 - K * lam * cx / u
        d12 = -K / u
        d21 = delta * lam * cx * up
        d22 = delta * up
        v11 = d11 * q11 + d12 * q21
        v21 = d21 * q11 + d22 * q21
        v12 = d11 * q12 + d12 * q22
        v22 = d21 * q12 + d22 * q22
        r11 = math.hypot(v11, v21)
        q11 = v11 / r11
        q21 = v21 / r11
        r12 = q11 * v12 + q21 * v22
        w1 = v12 - r12 * q11
        w2 = v22 - r12 * q21
        r22 = math.hypot(w1, w2)
        q12 = w1 / r22
        q22 = w2 / r22
        if i >= transient:
            s1 += math.log(r11)
            s2 += math.log(r22)
            sd += math.log(delta * up)
            n_done += 1
        x = x - K * math.log(u)
        x = x - _TWO_PI * math.floor(x / _TWO_PI)
        y = u ** delta
    return s1, s2, sd, n_done, -1, x, y


def _hopf_rhs(r, z, mu1, mu2, a, c, d, e, f, logr):
    if logr:
        # r holds log(r); radial equation divided by r
        rr = math.exp(2.0 * r)
        dr = mu1 + a * z + c * rr + d * z * z
    else:
        rr = r * r
        dr = mu1 * r + a * r * z + c * r * rr + d * r * z * z
    dz = mu2 - rr - z * z + e * rr * z + f * z * z * z
    return dr, dz


def hopf_rk4(r0, z0, h, nsteps, mu1, mu2, a, c, d, e, f, logr):
    """Classical RK4 for the planar truncated normal form.

    With ``logr`` set, the first coordinate is ``log r``. The state update
    is compensated (Kahan) so rounding does not mask the method's
    truncation error at small steps. Returns arrays of length
    ``nsteps + 1``.
    """
    rs = np.empty(nsteps + 1)
    zs = np.empty(nsteps + 1)
    r = r0
    z = z0
    rs[0] = r
    zs[0] = z
    hh = 0.5 * h
    cr = 0.0
    cz = 0.0
    for i in range(nsteps):
        k1r, k1z = _hopf_rhs(r, z, mu1, mu2, a, c, d, e, f, logr)
        k2r, k2z = _hopf_rhs(r + hh * k1r, z + hh * k1z, mu1, mu2, a, c, d, e, f, logr)
        k3r, k3z = _hopf_rhs(r + hh * k2r, z + hh * k2z, mu1, mu2, a, c, d, e, f, logr)
        k4r, k4z = _hopf_rhs(r + h * k3r, z + h * k3z, mu1, mu2, a, c, d, e, f, logr)
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
    return rs, zs
