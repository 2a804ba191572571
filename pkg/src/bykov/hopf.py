"""Truncated Hopf-zero unfoldings in cylindrical coordinates.

The planar part is written in ``(r, z)``; the lift adds ``theta' = omega``.
Order 2::

    r' = mu1 r + a r z
    z' = mu2 - r**2 - z**2

Order 3 adds ``c r**3 + d r z**2`` to ``r'`` and ``e r**2 z + f z**3`` to
``z'``. Both fields vanish identically in ``r'`` on the axis ``r = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ._backend import kernels as _kernels
from ._pykernels import _hopf_rhs


class NoEquilibrium(ValueError):
    pass


class DegenerateCoefficients(ValueError):
    pass


class StepFailure(ArithmeticError):
    pass


class OrbitLost(ArithmeticError):
    def __init__(self, t: float, r: float, z: float):
        super().__init__(f"orbit left the bounding box at t={t:.6g} (r={r:.6g}, z={z:.6g})")
        self.t, self.r, self.z = t, r, z


@dataclass(frozen=True)
class HopfParams:
    """Unfolding parameters and normal-form coefficients.

    ``a_h`` is the second-order coefficient (distinct from the map ratio
    ``a = lam / A``).
    """

    mu1: float
    mu2: float
    a_h: float = 1.0
    c: float = 0.0
    d: float = 0.0
    e: float = 0.0
    f: float = 0.0
    omega_lift: float = 1.0

    def __post_init__(self):
        if not self.a_h > 0:
            raise ValueError("a_h must be positive")
        if not self.omega_lift > 0:
            raise ValueError("omega_lift must be positive")

    def cubic(self, order: int) -> tuple[float, float, float, float]:
        if order == 2:
            return 0.0, 0.0, 0.0, 0.0
        if order == 3:
            return self.c, self.d, self.e, self.f
        raise ValueError("order must be 2 or 3")

    def open_conditions(self) -> bool:
        s = 3.0 * self.c + self.e
        return s > self.d + 3.0 * self.f and 3.0 * s + self.d + 3.0 * self.f < 0


@dataclass(frozen=True)
class PlanarState:
    r: float
    z: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("r must be non-negative")

    def __iter__(self):
        yield self.r
        yield self.z


def field_order2(s, p: HopfParams) -> tuple[float, float]:
    r, z = s
    return p.mu1 * r + p.a_h * r * z, p.mu2 - r * r - z * z


def field_order3(s, p: HopfParams) -> tuple[float, float]:
    r, z = s
    rr = r * r
    zz = z * z
    return (p.mu1 * r + p.a_h * r * z + p.c * r * rr + p.d * r * zz,
            p.mu2 - rr - zz + p.e * rr * z + p.f * z * zz)


@dataclass(frozen=True)
class HopfField:
    """Callable planar field of a given order; integrates on the fast path."""

    params: HopfParams
    order: int = 2

    def __post_init__(self):
        self.params.cubic(self.order)

    def __call__(self, r, z):
        fn = field_order2 if self.order == 2 else field_order3
        return fn((r, z), self.params)

    def kernel_args(self):
        p = self.params
        return (p.mu1, p.mu2, p.a_h, *p.cubic(self.order))


def numeric_jacobian(field, r: float, z: float, h: float = 1e-5) -> np.ndarray:
    """Central differences of a planar field ``field(r, z)``."""
    fr1 = np.array(field(r + h, z))
    fr0 = np.array(field(r - h, z))
    fz1 = np.array(field(r, z + h))
    fz0 = np.array(field(r, z - h))
    return np.column_stack([(fr1 - fr0) / (2 * h), (fz1 - fz0) / (2 * h)])


@dataclass(frozen=True)
class Equilibrium:
    state: PlanarState
    radial_eig: complex
    axial_eig: complex
    kind: str  # "axis" or "center"


def _axis_root(p: HopfParams, seed: float, tol: float = 1e-15) -> float:
    """Newton on ``mu2 - z**2 + f z**3 = 0`` (the axis restriction of z')."""
    z = seed
    for _ in range(100):
        g = p.mu2 - z * z + p.f * z ** 3
        dg = -2.0 * z + 3.0 * p.f * z * z
        if dg == 0:
            break
        step = g / dg
        z -= step
        if abs(step) <= tol * max(1.0, abs(z)):
            return z
    raise NoEquilibrium(f"axis Newton did not converge from z={seed!r}")


def equilibria_and_eigenvalues(p: HopfParams, order: int = 2) -> list[Equilibrium]:
    """Axis equilibria (top first) with their radial and axial eigenvalues.

    Order 2 uses the closed forms ``mu1 +- a sqrt(mu2)`` and
    ``-+ 2 sqrt(mu2)``, and also returns the off-axis center when it
    exists. Order 3 finds the axis equilibria by Newton, seeded at
    ``+-sqrt(mu2) + f mu2 / 2``; on the axis the Jacobian is diagonal,
    so its entries are the eigenvalues.
    """
    if not p.mu2 > 0:
        raise NoEquilibrium("axis equilibria need mu2 > 0")
    s = math.sqrt(p.mu2)
    out = []
    if order == 2:
        out.append(Equilibrium(PlanarState(0.0, s), p.mu1 + p.a_h * s, -2.0 * s, "axis"))
        out.append(Equilibrium(PlanarState(0.0, -s), p.mu1 - p.a_h * s, 2.0 * s, "axis"))
        rc2 = p.mu2 - (p.mu1 / p.a_h) ** 2
        if rc2 > 0:
            st = PlanarState(math.sqrt(rc2), -p.mu1 / p.a_h)
            ev = np.linalg.eigvals(numeric_jacobian(HopfField(p, 2), st.r, st.z))
            out.append(Equilibrium(st, complex(ev[0]), complex(ev[1]), "center"))
        return out
    p.cubic(order)
    for sign in (1.0, -1.0):
        z = _axis_root(p, sign * s + 0.5 * p.f * p.mu2)
        radial = p.mu1 + p.a_h * z + p.d * z * z
        axial = -2.0 * z + 3.0 * p.f * z * z
        out.append(Equilibrium(PlanarState(0.0, z), radial, axial, "axis"))
    return out


def contraction_exponent(p: HopfParams, order: int = 3) -> float:
    """``(C1/E1)(C2/E2)`` from the axis eigenvalues.

    At the upper equilibrium the axis direction contracts (``C1``) and the
    radial one expands (``E1``); at the lower one the roles swap.
    """
    top, bot = equilibria_and_eigenvalues(p, order)[:2]
    C1, E1 = -top.axial_eig.real if isinstance(top.axial_eig, complex) else -top.axial_eig, top.radial_eig
    C2, E2 = -bot.radial_eig, bot.axial_eig
    C1, E1, C2, E2 = (float(np.real(v)) for v in (C1, E1, C2, E2))
    if min(C1, E1, C2, E2) <= 0:
        raise ValueError("axis equilibria are not saddles of the expected type")
    return (C1 / E1) * (C2 / E2)


def first_integral_G(s, p: HopfParams) -> float:
    """``(a/2) r**(2/a) (mu2 - r**2/(1+a) - z**2)``, conserved when ``mu1 = 0``."""
    r, z = s
    if r < 0:
        raise ValueError("r must be non-negative")
    a = p.a_h
    return 0.5 * a * r ** (2.0 / a) * (p.mu2 - r * r / (1.0 + a) - z * z)


def ahc_line(c: float, d: float, e: float, f: float) -> float:
    """Slope of the line ``mu2 = slope * mu1`` carrying the attracting cycle."""
    s = 3.0 * c + e
    den = 3.0 * s + d + 3.0 * f
    if den == 0:
        raise DegenerateCoefficients("3(3c+e)+d+3f vanishes")
    if not (s > d + 3.0 * f and den < 0):
        raise DegenerateCoefficients("coefficients violate 3c+e > d+3f and 3(3c+e)+d+3f < 0")
    return -4.0 / den


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    r: np.ndarray
    z: np.ndarray
    halvings: int = 0


def _rk4_step(field, r, z, h):
    k1r, k1z = field(r, z)
    k2r, k2z = field(r + 0.5 * h * k1r, z + 0.5 * h * k1z)
    k3r, k3z = field(r + 0.5 * h * k2r, z + 0.5 * h * k2z)
    k4r, k4z = field(r + h * k3r, z + h * k3z)
    return (r + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r),
            z + h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z))


def _integrate_python(field, r, z, h, nsteps, max_halvings=40):
    rs = np.empty(nsteps + 1)
    zs = np.empty(nsteps + 1)
    rs[0], zs[0] = r, z
    total_halvings = 0
    for i in range(nsteps):
        remaining = h
        hc = h
        halvings = 0
        while remaining > 0:
            step = min(hc, remaining)
            rn, zn = _rk4_step(field, r, z, step)
            if rn < -1e-12:
                hc *= 0.5
                halvings += 1
                if halvings > max_halvings:
                    raise StepFailure(f"step rejected {max_halvings} times at t={i * h:.6g}")
                continue
            r, z = rn, zn
            remaining -= step
        total_halvings += halvings
        rs[i + 1], zs[i + 1] = r, z
    return rs, zs, total_halvings


def integrate(field, s0, t_span, h: float) -> Trajectory:
    """Fixed-step classical RK4 from ``s0`` over ``t_span = (t0, t1)``.

    A step whose radial coordinate falls below ``-1e-12`` is retried with
    half the step (up to 40 times) until the nominal step is covered.
    :class:`HopfField` instances run on the compiled kernel and drop to the
    step-halving loop only if that check fails.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    t0, t1 = t_span
    if not t1 >= t0:
        raise ValueError("t_span must be increasing")
    nsteps = int(round((t1 - t0) / h))
    r0, z0 = (float(v) for v in s0)
    t = t0 + h * np.arange(nsteps + 1)
    if isinstance(field, HopfField):
        rs, zs = _kernels.hopf_rk4(r0, z0, h, nsteps, *field.kernel_args(), False)
        if np.all(rs >= -1e-12):
            return Trajectory(t, np.asarray(rs), np.asarray(zs))
    rs, zs, nh = _integrate_python(field, r0, z0, h, nsteps)
    return Trajectory(t, rs, zs, nh)


@dataclass(frozen=True)
class Section:
    """Half-plane ``z = z0`` crossed in the direction ``sign(z') = direction``."""

    z0: float = 0.0
    direction: int = 1

    def __post_init__(self):
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")


@dataclass(frozen=True)
class SectionSamples:
    t: np.ndarray
    theta: np.ndarray
    r: np.ndarray
    log_r: np.ndarray

    def pairs(self):
        """Consecutive ``((theta_n, r_n), (theta_n+1, r_n+1))`` samples."""
        x = np.column_stack([self.theta, self.r])
        return x[:-1], x[1:]


def lift_and_section(p: HopfParams, order: int, section: Section, n_hits: int,
                     s0, h: float = 1e-3, t_max: float = 1e4, theta0: float = 0.0,
                     box: tuple[float, float] = (10.0, 10.0), log_radius: bool = False,
                     chunk: int = 4096) -> SectionSamples:
    """Integrate the lifted field and record section crossings.

    ``theta`` advances at ``omega_lift``, so crossing angles are
    ``theta0 + omega_lift * t`` reduced mod ``2 pi``. Crossing times are
    refined by bisection to ``1e-10``. With ``log_radius`` the planar
    system is integrated in ``(log r, z)``, which resolves orbits hugging
    the axis.

    Raises
    ------
    OrbitLost
        When ``r`` or ``|z|`` exceeds ``box``, or ``t_max`` passes first.
    """
    if n_hits < 1:
        raise ValueError("n_hits must be at least 1")
    if not h > 0:
        raise ValueError("h must be positive")
    kargs = HopfField(p, order).kernel_args()
    logr = bool(log_radius)
    r0, z0 = (float(v) for v in s0)
    if logr:
        if not r0 > 0:
            raise ValueError("log_radius needs r0 > 0")
        r0 = math.log(r0)

    def rhs(r, z):
        return _hopf_rhs(r, z, *kargs, logr)

    rmax, zmax = box
    times, rads = [], []
    t = 0.0
    cur_r, cur_z = r0, z0
    zc = section.z0
    while len(times) < n_hits:
        if t > t_max:
            raise OrbitLost(t, math.exp(cur_r) if logr else cur_r, cur_z)
        rs, zs = _kernels.hopf_rk4(cur_r, cur_z, h, chunk, *kargs, logr)
        rs = np.asarray(rs)
        zs = np.asarray(zs)
        rad = np.exp(rs) if logr else rs
        out = (rad > rmax) | (np.abs(zs) > zmax) | ~np.isfinite(rs) | ~np.isfinite(zs)
        limit = int(np.argmax(out)) if out.any() else chunk + 1
        g = section.direction * (zs - zc)
        hits = np.flatnonzero((g[:-1] < 0) & (g[1:] >= 0))
        for i in hits:
            if i + 1 >= limit:
                break
            lo, hi = 0.0, h
            while hi - lo > 1e-10:
                mid = 0.5 * (lo + hi)
                _, zm = _rk4_step(rhs, rs[i], zs[i], mid)
                if section.direction * (zm - zc) < 0:
                    lo = mid
                else:
                    hi = mid
            tau = 0.5 * (lo + hi)
            rc, _ = _rk4_step(rhs, rs[i], zs[i], tau)
            times.append(t + i * h + tau)
            rads.append(rc)
            if len(times) >= n_hits:
                break
        if out.any():
            j = limit
            raise OrbitLost(t + j * h, float(rad[j]), float(zs[j]))
        t += chunk * h
        cur_r, cur_z = float(rs[-1]), float(zs[-1])
    tt = np.array(times)
    rr = np.array(rads)
    theta = np.mod(theta0 + p.omega_lift * tt, 2.0 * math.pi)
    if logr:
        return SectionSamples(tt, theta, np.exp(rr), rr)
    with np.errstate(divide="ignore"):
        return SectionSamples(tt, theta, rr, np.log(rr))


def _shoot(p: HopfParams, order: int, r_seed: float, h: float, t_max: float) -> int:
    """Follow the radial unstable direction of the upper equilibrium.

    Returns -1 when the orbit passes outside the lower equilibrium (drops
    below it) and +1 when it turns back up inside.
    """
    top, bot = equilibria_and_eigenvalues(p, order)[:2]
    z_top, z_bot = top.state.z, bot.state.z
    margin = 0.25 * (z_top - z_bot)
    field = HopfField(p, order)
    r, z = r_seed, z_top
    steps = int(t_max / h)
    left_top = False
    for _ in range(steps):
        rn, zn = _rk4_step(field, r, z, h)
        if zn < z_bot - margin:
            return -1
        if left_top and zn > z and zn < z_top - margin:
            return 1
        if z_top - zn > margin:
            left_top = True
        r, z = rn, zn
    raise OrbitLost(t_max, r, z)


def locate_ahc(p: HopfParams, mu1_bracket: tuple[float, float], order: int = 3,
               r_seed: float = 1e-6, h: float = 2e-3, t_max: float = 500.0,
               tol: float = 1e-12) -> HopfParams:
    """Bisect ``mu1`` (``mu2`` fixed) for the radial connection between the axis equilibria.

    The returned parameters carry the heteroclinic cycle up to ``tol`` in
    ``mu1``; :func:`ahc_line` gives the leading-order prediction to seed
    the bracket.
    """
    lo, hi = mu1_bracket
    s_lo = _shoot(replace(p, mu1=lo), order, r_seed, h, t_max)
    s_hi = _shoot(replace(p, mu1=hi), order, r_seed, h, t_max)
    if s_lo == s_hi:
        raise ValueError("bracket does not enclose the connection")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _shoot(replace(p, mu1=mid), order, r_seed, h, t_max) == s_lo:
            lo = mid
        else:
            hi = mid
    return replace(p, mu1=0.5 * (lo + hi))


def fit_contraction(samples: SectionSamples, floor: float = -14.0, min_ratios: int = 2) -> float:
    """Contraction exponent from successive section hits near the axis.

    Near an attracting cycle ``log r_{n+1} ~ delta * log r_n + b``, so the
    differences ``D_n = log r_{n+1} - log r_n`` satisfy ``D_{n+1} ~ delta D_n``
    without the offset ``b``. The slope through the origin is fitted over
    hits above ``floor``; below it the residual splitting of the located
    connection dominates and the sequence saturates.
    """
    lr = samples.log_r
    keep = np.isfinite(lr) & (lr > floor)
    n = int(np.argmin(keep)) if not keep.all() else lr.size
    D = np.diff(lr[:n])
    if D.size < min_ratios + 1:
        raise ValueError("not enough section samples above the floor for a fit")
    x, y = D[:-1], D[1:]
    return float(np.dot(x, y) / np.dot(x, x))
