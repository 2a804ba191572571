"""Stable and unstable manifolds of saddle orbits and their crossings.

Distances use the scaled metric ``sqrt(dx**2 + (y_scale*dy)**2)`` with
``y_scale`` the reciprocal of the strip height ``2 (A + lam)**delta``, so
that angle and height contribute on comparable scales.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ..maps import ReturnMap
from ..model import TWO_PI
from .periodic import PeriodicOrbit, Stability


class Side(enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"


def default_y_scale(m: ReturnMap) -> float:
    return 1.0 / (2.0 * (m.A + m.lam) ** m.delta)


@dataclass(frozen=True)
class Branch:
    xs: np.ndarray
    ys: np.ndarray
    escaped: bool
    converged: bool
    images: int


@dataclass(frozen=True)
class ManifoldCurve:
    anchor: PeriodicOrbit
    side: Side
    branches: tuple[Branch, Branch]
    arclength: float
    y_scale: float
    eigenvector: tuple[float, float]
    truncated: bool

    @property
    def polyline(self) -> tuple[np.ndarray, np.ndarray]:
        """Both branches joined through the anchor point (lifted angles)."""
        b0, b1 = self.branches
        xs = np.concatenate([b0.xs[::-1], [self.anchor.x], b1.xs])
        ys = np.concatenate([b0.ys[::-1], [self.anchor.y], b1.ys])
        return xs, ys

    def terminal_points(self) -> list[tuple[float, float]]:
        return [(b.xs[-1], b.ys[-1]) for b in self.branches if b.xs.size]


def _apply(m: ReturnMap, x, y, steps: int, forward: bool, shift: float):
    """``steps`` applications of ``F`` (or its inverse), lifted angle minus
    ``shift``. Points leaving the sheet become NaN."""
    x = np.array(x, dtype=float)
    y = np.array(y, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        for _ in range(steps):
            if forward:
                X, Y, u = m.lift(x, y, check=False)
                bad = ~(u > 0)
            else:
                bad = ~(y > 0)
                ys = np.where(bad, 1.0, y)
                X, Y = m.inverse(x, ys)
            X = np.where(bad, np.nan, X)
            Y = np.where(bad, np.nan, Y)
            x, y = X, Y
    return x - shift, y


#: Sharp turns are not refined below this fraction of the point spacing.
TURN_FLOOR = 0.02


def _grow_branch(m, q, v, lam_fd, d, forward, steps, shift, spacing, y_scale,
                 max_arclength, max_images, max_angle, max_points):
    def seed(t):
        s = d * lam_fd ** t
        return q[0] + s * v[0], q[1] + s * v[1]

    def image(t, j):
        x, y = seed(t)
        if j:
            x, y = _apply(m, x, y, steps * j, forward, shift * j)
        return x, y

    xs_all, ys_all = [], []
    n_total = 0
    length = 0.0
    escaped = converged = False
    j = 0
    t = np.linspace(0.0, 1.0, 17)
    x, y = image(t, 0)
    while j < max_images:
        # refine the current fundamental-domain image
        for _ in range(60):
            dx = np.diff(x)
            dy = np.diff(y) * y_scale
            seg = np.hypot(dx, dy)
            need = seg > spacing
            if x.size >= 3:
                ang = np.arctan2(dy, dx)
                turn = np.abs((np.diff(ang) + math.pi) % TWO_PI - math.pi)
                sharp = (turn > max_angle)
                need[:-1] |= sharp & (seg[:-1] > TURN_FLOOR * spacing)
                need[1:] |= sharp & (seg[1:] > TURN_FLOOR * spacing)
            need &= np.isfinite(seg)
            if not need.any() or n_total + x.size > max_points:
                break
            tm = 0.5 * (t[:-1] + t[1:])[need]
            xm, ym = image(tm, j)
            t = np.insert(t, np.flatnonzero(need) + 1, tm)
            x = np.insert(x, np.flatnonzero(need) + 1, xm)
            y = np.insert(y, np.flatnonzero(need) + 1, ym)
        bad = ~(np.isfinite(x) & np.isfinite(y))
        if bad.any():
            cut = int(np.argmax(bad))
            x, y = x[:cut], y[:cut]
            escaped = True
        start = 1 if xs_all else 0
        seg_len = np.hypot(np.diff(x), np.diff(y) * y_scale)
        if xs_all and x.size:
            seg_len = np.concatenate(
                [[math.hypot(x[0] - xs_all[-1][-1], (y[0] - ys_all[-1][-1]) * y_scale)], seg_len])
            start = 0
        cum = length + np.cumsum(seg_len)
        if cum.size and cum[-1] >= max_arclength:
            n_keep = int(np.searchsorted(cum, max_arclength)) + 1
            if start == 0 and xs_all:
                x, y = x[:n_keep], y[:n_keep]
            else:
                x, y = x[:n_keep + 1], y[:n_keep + 1]
            xs_all.append(x)
            ys_all.append(y)
            length = max_arclength
            j += 1
            break
        xs_all.append(x)
        ys_all.append(y)
        n_total += x.size
        length = float(cum[-1]) if cum.size else length
        j += 1
        if escaped or n_total >= max_points:
            break
        diam = math.hypot(np.ptp(x), np.ptp(y) * y_scale) if x.size else 0.0
        if diam < 1e-9:
            converged = True
            break
        # next image: map the refined points once more
        x, y = _apply(m, x, y, steps, forward, shift)
        t = t[:x.size]
    xs = np.concatenate(xs_all) if xs_all else np.empty(0)
    ys = np.concatenate(ys_all) if ys_all else np.empty(0)
    return Branch(xs, ys, escaped, converged, j), length


def grow_manifold(m: ReturnMap, orbit: PeriodicOrbit, side: Side, max_arclength: float = 20.0,
                  spacing: float = 0.01, seed_distance: float = 1e-6, max_images: int = 200,
                  max_angle: float = 0.3, max_points: int = 200_000,
                  y_scale: float | None = None) -> ManifoldCurve:
    """Grow both branches of one invariant manifold of a saddle orbit.

    A fundamental domain on the eigenvector, at scaled distance
    ``seed_distance`` from the anchor, is carried by ``F^k`` (unstable
    side) or by the exact inverse (stable side). Points are inserted so
    consecutive points stay within ``spacing`` and the polyline turns by
    less than ``max_angle`` per vertex, down to a segment length of
    ``TURN_FLOOR * spacing``. A branch stops at ``max_arclength``, when it
    leaves the sheet, when its images shrink onto an attractor, or when it
    holds ``max_points`` points.
    """
    if orbit.stability is not Stability.SADDLE:
        raise ValueError("manifolds are grown only from saddle orbits")
    mults = orbit.multipliers
    if any(abs(complex(mu).imag) > 1e-12 for mu in mults):
        raise ValueError("saddle multipliers must be real")
    side = Side(side)
    if y_scale is None:
        y_scale = default_y_scale(m)
    vals, vecs = np.linalg.eig(orbit.monodromy)
    vals = vals.real
    vecs = vecs.real
    i = int(np.argmax(np.abs(vals))) if side is Side.UNSTABLE else int(np.argmin(np.abs(vals)))
    mu = vals[i]
    v = vecs[:, i] / math.hypot(vecs[0, i], vecs[1, i] * y_scale)
    power = 2 if mu < 0 else 1
    lam_fd = abs(mu) ** power
    if side is Side.STABLE:
        lam_fd = 1.0 / lam_fd
    steps = orbit.period * power
    shift = TWO_PI * orbit.winding * power
    forward = side is Side.UNSTABLE
    if not forward:
        shift = -shift
    q = (orbit.x, orbit.y)
    branches = []
    total = 0.0
    truncated = False
    for sign in (1.0, -1.0):
        b, length = _grow_branch(m, q, (sign * v[0], sign * v[1]), lam_fd, seed_distance,
                                 forward, steps, shift, spacing, y_scale, max_arclength,
                                 max_images, max_angle, max_points)
        truncated |= length >= max_arclength
        branches.append(b)
        total += length
    return ManifoldCurve(orbit, side, tuple(branches), total, y_scale,
                         (float(v[0]), float(v[1])), truncated)


@dataclass(frozen=True)
class Crossing:
    x: float
    y: float
    sign: int


@dataclass(frozen=True)
class HomoclinicReport:
    min_distance: float
    crossings: tuple[Crossing, ...]
    tangency_flag: bool
    unstable: ManifoldCurve | None = None
    stable: ManifoldCurve | None = None

    @property
    def n_crossings(self) -> int:
        return len(self.crossings)


def _segments(curve: ManifoldCurve):
    """Segment start points (angle reduced) and displacement vectors, per branch."""
    P, D = [], []
    for b in curve.branches:
        if b.xs.size < 2:
            continue
        x0 = np.mod(b.xs[:-1], TWO_PI)
        P.append(np.column_stack([x0, b.ys[:-1]]))
        D.append(np.column_stack([np.diff(b.xs), np.diff(b.ys)]))
    if not P:
        return np.empty((0, 2)), np.empty((0, 2))
    return np.concatenate(P), np.concatenate(D)


def _periodic_tree(points: np.ndarray, y_scale: float, y_ref: float, span: float):
    data = np.column_stack([np.mod(points[:, 0], TWO_PI),
                            (points[:, 1] - y_ref) * y_scale])
    # TWO_PI itself is outside the half-open box; fold it back
    data[:, 0] = np.where(data[:, 0] >= TWO_PI, 0.0, data[:, 0])
    return cKDTree(data, boxsize=[TWO_PI, span]), data


def _near_anchor(points: np.ndarray, orbit: PeriodicOrbit, y_scale: float, radius: float):
    mask = np.zeros(points.shape[0], dtype=bool)
    for q in orbit.points:
        dx = np.abs(np.mod(points[:, 0] - q.x + math.pi, TWO_PI) - math.pi)
        dy = (points[:, 1] - q.y) * y_scale
        mask |= np.hypot(dx, dy) < radius
    return mask


def find_crossings(unstable: ManifoldCurve, stable: ManifoldCurve,
                   exclude_radius: float = 1e-3, tol_tangent: float = 1e-6,
                   distance_exclude: float = 0.1) -> HomoclinicReport:
    """Segment intersections of two manifold curves on the cylinder.

    Segments within ``exclude_radius`` of the anchor orbit are ignored
    (both curves meet there by construction). ``min_distance`` is measured
    between unstable and stable points farther than ``distance_exclude``
    from the anchor, since near it the distance only reflects the angle
    between the eigenvectors; it is 0 when a crossing exists.
    """
    if unstable.side is stable.side:
        raise ValueError("detection needs one stable and one unstable curve")
    ys_ = unstable.y_scale
    Pu, Du = _segments(unstable)
    Ps, Ds = _segments(stable)
    if Pu.shape[0] == 0 or Ps.shape[0] == 0:
        return HomoclinicReport(math.inf, (), False, unstable, stable)
    keep_u = ~_near_anchor(Pu, unstable.anchor, ys_, exclude_radius)
    keep_s = ~_near_anchor(Ps, stable.anchor, ys_, exclude_radius)
    Pu, Du = Pu[keep_u], Du[keep_u]
    Ps, Ds = Ps[keep_s], Ds[keep_s]
    if Pu.shape[0] == 0 or Ps.shape[0] == 0:
        return HomoclinicReport(math.inf, (), False, unstable, stable)
    Mu = Pu + 0.5 * Du
    Ms = Ps + 0.5 * Ds
    y_all = np.concatenate([Mu[:, 1], Ms[:, 1]])
    y_ref = float(y_all.min()) - 1.0 / ys_
    span = float((y_all.max() - y_ref) * ys_) * 4.0 + 1e3
    tu, du_ = _periodic_tree(Mu, ys_, y_ref, span)
    ts, ds_ = _periodic_tree(Ms, ys_, y_ref, span)
    lu = np.hypot(Du[:, 0], Du[:, 1] * ys_)
    ls = np.hypot(Ds[:, 0], Ds[:, 1] * ys_)
    far_u = ~_near_anchor(Mu, unstable.anchor, ys_, distance_exclude)
    far_s = ~_near_anchor(Ms, stable.anchor, ys_, distance_exclude)
    if far_u.any() and far_s.any():
        tfar, _ = _periodic_tree(Ms[far_s], ys_, y_ref, span)
        dist, _ = tfar.query(du_[far_u], k=1)
        min_d = float(np.min(dist))
    else:
        min_d = math.inf
    radius = 0.5 * (float(lu.max()) + float(ls.max())) + 1e-12
    crossings = []
    for iu, cand in enumerate(tu.query_ball_tree(ts, radius)):
        if not cand:
            continue
        p = Pu[iu].copy()
        d1 = Du[iu] * np.array([1.0, ys_])
        for js in cand:
            q = Ps[js].copy()
            # bring the stable segment next to the unstable one on the cylinder
            q[0] += TWO_PI * round((Mu[iu, 0] - Ms[js, 0]) / TWO_PI)
            d2 = Ds[js] * np.array([1.0, ys_])
            r = np.array([q[0] - p[0], (q[1] - p[1]) * ys_])
            det = d1[0] * d2[1] - d1[1] * d2[0]
            if det == 0.0:
                continue
            s = (r[0] * d2[1] - r[1] * d2[0]) / det
            t = (r[0] * d1[1] - r[1] * d1[0]) / det
            if 0.0 <= s < 1.0 and 0.0 <= t < 1.0:
                cx = p[0] + s * Du[iu, 0]
                cy = p[1] + s * Du[iu, 1]
                crossings.append(Crossing(float(np.mod(cx, TWO_PI)), float(cy),
                                          1 if det > 0 else -1))
    if crossings:
        min_d = 0.0
    tangency = (not crossings) and min_d < tol_tangent
    return HomoclinicReport(min_d, tuple(crossings), tangency, unstable, stable)


def detect_homoclinic(m: ReturnMap, orbit: PeriodicOrbit, max_arclength: float = 20.0,
                      spacing: float = 0.01, exclude_radius: float = 1e-3,
                      tol_tangent: float = 1e-6, distance_exclude: float = 0.1,
                      **grow_kw) -> HomoclinicReport:
    """Grow both manifolds of ``orbit`` and intersect them."""
    wu = grow_manifold(m, orbit, Side.UNSTABLE, max_arclength, spacing, **grow_kw)
    ws = grow_manifold(m, orbit, Side.STABLE, max_arclength, spacing, **grow_kw)
    return find_crossings(wu, ws, exclude_radius, tol_tangent, distance_exclude)
