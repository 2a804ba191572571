"""Periodic orbits in the universal cover and Arnold-tongue boundaries."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..maps import DomainEscape, ReturnMap
from ..model import TWO_PI, CylinderPoint, wrap_angle


class Stability(enum.Enum):
    SINK = "Sink"
    SADDLE = "Saddle"
    SOURCE = "Source"
    NON_HYPERBOLIC = "NonHyperbolic"


#: Multipliers within this distance of the unit circle are non-hyperbolic.
HYPERBOLIC_TOL = 1e-9


def classify_multipliers(mults, tol: float = HYPERBOLIC_TOL) -> Stability:
    mods = sorted(abs(complex(mu)) for mu in mults)
    if any(abs(r - 1.0) <= tol for r in mods):
        return Stability.NON_HYPERBOLIC
    if mods[-1] < 1.0:
        return Stability.SINK
    if mods[0] > 1.0:
        return Stability.SOURCE
    return Stability.SADDLE


@dataclass(frozen=True)
class PeriodicOrbit:
    """A period-``k`` orbit with ``F^k`` advancing the lifted angle by ``2 pi * winding``."""

    period: int
    points: tuple[CylinderPoint, ...]
    multipliers: tuple[complex, complex]
    stability: Stability
    winding: int
    det_product: float
    monodromy: np.ndarray

    @property
    def x(self) -> float:
        return self.points[0].x

    @property
    def y(self) -> float:
        return self.points[0].y


def orbit_jacobian(m: ReturnMap, x: float, y: float, k: int):
    """Lifted ``F^k(x, y)``, its Jacobian and ``prod delta*u_j**(delta-1)``.

    Returns ``(X, Y, J, det_product, path)`` where ``path`` lists the
    visited points (reduced angles) before each application of ``F``.
    """
    delta, K, A, lam = m.kernel_args()
    j11, j12, j21, j22 = 1.0, 0.0, 0.0, 1.0
    det = 1.0
    X, Y = x, y
    path = []
    for _ in range(k):
        path.append((X, Y))
        cx = math.cos(X)
        u = Y + A + lam * math.sin(X)
        if not u > 0:
            raise DomainEscape(X, Y, u)
        up = u ** (delta - 1.0)
        d11 = 1.0 - K * lam * cx / u
        d12 = -K / u
        d21 = delta * lam * cx * up
        d22 = delta * up
        j11, j12, j21, j22 = (d11 * j11 + d12 * j21, d11 * j12 + d12 * j22,
                              d21 * j11 + d22 * j21, d21 * j12 + d22 * j22)
        det *= d22
        X = X - K * math.log(u)
        Y = u ** delta
    J = np.array([[j11, j12], [j21, j22]])
    return X, Y, J, det, path


def _newton(m: ReturnMap, x: float, y: float, k: int, winding: int, max_iter: int,
            tol: float):
    """Damped Newton on ``F^k(p) - p - (2 pi winding, 0)``.

    Returns the converged ``(x, y)`` or None.
    """
    yscale = max(m.A, 1e-300)

    def residual(px, py):
        X, Y, J, _, _ = orbit_jacobian(m, px, py, k)
        G = np.array([X - px - TWO_PI * winding, Y - py])
        return G, J, math.hypot(G[0], G[1] / yscale)

    G, J, nrm = residual(x, y)
    for _ in range(max_iter):
        M = J - np.eye(2)
        try:
            step = np.linalg.solve(M, -G)
        except np.linalg.LinAlgError:
            return None
        t = 1.0
        for _ in range(30):
            xn, yn = x + t * step[0], y + t * step[1]
            try:
                Gn, Jn, nn = residual(xn, yn)
            except DomainEscape:
                nn = math.inf
            if nn < nrm or nn <= tol:
                break
            t *= 0.5
        else:
            return None
        x, y, G, J, nrm = xn, yn, Gn, Jn, nn
        if nrm <= tol or (abs(t * step[0]) < 1e-15 and abs(t * step[1]) < 1e-15 * yscale):
            return (x, y) if nrm <= 1e3 * tol else None
    return None


def seed_grid(m: ReturnMap, n_x: int = 32, n_y: int = 8, y_max: float | None = None):
    """Rectangular seed grid over ``[0, 2 pi) x (0, y_max]``."""
    if y_max is None:
        y_max = 2.0 * (m.A + m.lam) ** m.delta
    xs = np.arange(n_x) * (TWO_PI / n_x)
    ys = np.linspace(0.0, y_max, n_y + 1)[1:]
    gx, gy = np.meshgrid(xs, ys)
    return list(zip(gx.ravel(), gy.ravel()))


def _same_point(p, q, tol):
    dx = abs(p[0] - q[0]) % TWO_PI
    return min(dx, TWO_PI - dx) < tol and abs(p[1] - q[1]) < tol


def find_periodic(m: ReturnMap, k: int, seeds=None, winding: int | None = None,
                  max_iter: int = 60, tol: float = 1e-12,
                  dedup_tol: float = 1e-8, limit: int | None = None) -> list[PeriodicOrbit]:
    """Period-``k`` orbits by Newton from each seed.

    Parameters
    ----------
    m : ReturnMap
    k : int
        Period, at least 1. Orbits of a smaller exact period are dropped.
    seeds : iterable of (x, y), optional
        Defaults to :func:`seed_grid`.
    winding : int, optional
        Only accept orbits whose ``F^k`` advances the lifted angle by
        ``2 pi * winding``; otherwise each seed keeps the winding of its
        own first image.
    limit : int, optional
        Stop after this many distinct orbits (existence queries use 1).
    """
    if k < 1:
        raise ValueError("period k must be at least 1")
    if seeds is None:
        seeds = seed_grid(m)
    found: list[PeriodicOrbit] = []
    for sx, sy in seeds:
        sx, sy = float(sx), float(sy)
        try:
            X, _, _, _, _ = orbit_jacobian(m, sx, sy, k)
        except DomainEscape:
            continue
        if not math.isfinite(X):
            continue
        w = round((X - sx) / TWO_PI) if winding is None else winding
        try:
            sol = _newton(m, sx, sy, k, w, max_iter, tol)
        except DomainEscape:
            continue
        if sol is None:
            continue
        x, y = sol
        X, Y, J, det, path = orbit_jacobian(m, x, y, k)
        pts = [(wrap_angle(px), py) for px, py in path]
        if any(_same_point(pts[0], pts[d], dedup_tol) for d in range(1, k) if k % d == 0):
            continue
        if any(o.winding == w and any(_same_point(pts[0], (q.x, q.y), dedup_tol) for q in o.points)
               for o in found):
            continue
        mults = np.linalg.eigvals(J)
        mults = tuple(sorted((complex(v) for v in mults), key=abs))
        found.append(PeriodicOrbit(k, tuple(CylinderPoint(px, py) for px, py in pts), mults,
                                   classify_multipliers(mults), w, det, J))
        if limit is not None and len(found) >= limit:
            break
    found.sort(key=lambda o: (o.winding, o.stability.value, o.x))
    return found


def _locked_u(K_omega: float, winding: int) -> float:
    # F advances the lifted angle by -K_omega*log(u); one full turn per
    # winding unit fixes u.
    return math.exp(-TWO_PI * winding / K_omega)


def fixed_point_oracle(delta: float, K_omega: float, A: float, lam: float, winding: int):
    """Closed-form fixed points of winding ``winding``.

    A fixed point has ``u = U = exp(-2 pi winding / K_omega)``, hence
    ``y = U**delta`` and ``sin x = (U - y - A) / lam``. Returns the (zero or
    two) solutions as ``(x, y)`` pairs.
    """
    U = _locked_u(K_omega, winding)
    y = U ** delta
    if lam == 0:
        return []
    s = (U - y - A) / lam
    if abs(s) > 1:
        return []
    x0 = math.asin(s)
    return [(wrap_angle(x0), y), (wrap_angle(math.pi - x0), y)]


def tongue_tip(delta: float, K_omega: float, winding: int) -> float:
    """``A`` at which the period-1 tongue of this winding reaches ``a = 0``."""
    U = _locked_u(K_omega, winding)
    return U - U ** delta


def fixed_point_boundary(delta: float, K_omega: float, A, winding: int):
    """Exact saddle-node boundary ``a = |U - U**delta - A| / A`` of a period-1 tongue."""
    U = _locked_u(K_omega, winding)
    A = np.asarray(A, dtype=float)
    return np.abs(U - U ** delta - A) / A


@dataclass(frozen=True)
class MapFamily:
    """Return maps with fixed ``delta`` and ``K_omega`` over the ``(A, a)`` plane."""

    delta: float
    K_omega: float

    def at(self, A: float, a: float) -> ReturnMap:
        if not A > 0:
            raise ValueError("A must be positive")
        if not 0 <= a < 1:
            raise ValueError("a must lie in [0, 1)")
        return ReturnMap.from_constants(self.delta, self.K_omega, A, a * A)


@dataclass(frozen=True)
class TongueColumn:
    A: float
    status: str  # "boundary", "inside", "outside"
    a_boundary: float | None


@dataclass(frozen=True)
class TongueBoundary:
    k: int
    winding: int
    columns: tuple[TongueColumn, ...]

    def branches(self):
        """Split boundary points into the two saddle-node curves.

        Columns are ordered by ``A``; the split is at the column of
        smallest boundary value, the tongue tip side.
        """
        pts = [(c.A, c.a_boundary) for c in self.columns if c.status == "boundary"]
        if not pts:
            return [], []
        i = min(range(len(pts)), key=lambda j: pts[j][1])
        return pts[:i + 1], pts[i:]


def tongue_boundary(family: MapFamily, k: int, winding: int, a_range, A_values,
                    seeds_xy: tuple[int, int] = (32, 8), a_tol: float = 1e-6) -> TongueBoundary:
    """Bisect in ``a`` for the birth of the period-``k`` pair in each ``A`` column.

    Existence at ``(A, a)`` means :func:`find_periodic` returns at least one
    orbit with the given winding. Columns where the pair exists at both
    ends of ``a_range`` are marked ``inside``; where it exists at neither,
    ``outside``.
    """
    if k < 1:
        raise ValueError("period k must be at least 1")
    a_lo, a_hi = a_range
    if not 0 <= a_lo <= a_hi < 1:
        raise ValueError("a_range must satisfy 0 <= lo <= hi < 1")

    def exists(A, a):
        m = family.at(A, a)
        seeds = seed_grid(m, *seeds_xy)
        return bool(find_periodic(m, k, seeds, winding=winding, limit=1))

    cols = []
    for A in A_values:
        A = float(A)
        e_lo, e_hi = exists(A, a_lo), exists(A, a_hi)
        if e_lo and e_hi:
            cols.append(TongueColumn(A, "inside", None))
            continue
        if not (e_lo or e_hi):
            cols.append(TongueColumn(A, "outside", None))
            continue
        lo, hi = a_lo, a_hi
        while hi - lo > a_tol:
            mid = 0.5 * (lo + hi)
            if exists(A, mid) == e_hi:
                hi = mid
            else:
                lo = mid
        cols.append(TongueColumn(A, "boundary", 0.5 * (lo + hi)))
    return TongueBoundary(k, winding, tuple(cols))
