"""Closed-form regime thresholds and sampled verification of their hypotheses.

``a = lam / A`` below ``curve_g(K_omega)`` gives an attracting invariant
circle; above ``curve_f(K_omega)`` the return map carries a two-symbol
horseshoe. The checkers estimate the sup-norms entering the annulus
principle and the hyperbolicity criterion by grid sampling; the grids are
augmented with the analytic extremal angles so the estimates are sharp, and
every sup-norm is inflated (every inf deflated) by :data:`SAFETY`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .maps import DomainEscape, ReturnMap
from .model import TWO_PI, DerivedConstants, ModelParams, derive_constants, validate

#: Lipschitz safety factor applied to grid-estimated norms.
SAFETY = 1.05


def curve_g(K_omega: float) -> float:
    """Torus threshold ``1 / sqrt(1 + K_omega**2)``."""
    if not K_omega > 0:
        raise ValueError("K_omega must be positive")
    return 1.0 / math.hypot(1.0, K_omega)


def curve_f(K_omega: float) -> float:
    """Horseshoe threshold ``(exp(4 pi/K) - 1) / (exp(4 pi/K) - 1/4)``.

    Evaluated with ``t = exp(-4 pi/K)`` as ``(1 - t) / (1 - t/4)`` so that
    small ``K_omega`` cannot overflow.
    """
    if not K_omega > 0:
        raise ValueError("K_omega must be positive")
    X = 4.0 * math.pi / K_omega
    num = -math.expm1(-X)
    return num / (0.75 + 0.25 * num)


def two_turns_threshold(c: float, K_omega: float) -> float:
    """Smallest ``a`` with ``stretch_P(0, a, c, K_omega) > pi / c``."""
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    if not K_omega > 0:
        raise ValueError("K_omega must be positive")
    em = math.expm1(-math.pi / (K_omega * c))
    return -em / ((1.0 - c) - c * em)


def stretch_P(delta_ang: float, a: float, c: float, K_omega: float) -> float:
    """Angular stretch ``K_omega * log((1 - a c) / (1 - a cos(delta_ang)))``."""
    num = 1.0 - a * c
    den = 1.0 - a * math.cos(delta_ang)
    if not (num > 0 and den > 0):
        raise ValueError("log argument factors must be positive")
    return K_omega * (math.log1p(-a * c) - math.log1p(-a * math.cos(delta_ang)))


@dataclass(frozen=True)
class AnnulusBand:
    y_lo: float
    y_hi: float

    def contains(self, y) -> np.ndarray:
        return (np.asarray(y) >= self.y_lo) & (np.asarray(y) <= self.y_hi)


def annulus_band(consts: DerivedConstants, A: float, lam: float) -> AnnulusBand:
    """``[A^delta (1-a)^delta, 2 A^delta (1+a)^delta]``."""
    if not A > 0:
        raise ValueError("annulus band needs A > 0")
    a = lam / A
    if not 0 <= a < 1:
        raise ValueError(f"annulus band needs 0 <= a < 1, got a={a!r}")
    d = consts.delta
    return AnnulusBand((A * (1.0 - a)) ** d, 2.0 * (A * (1.0 + a)) ** d)


def band_for(m: ReturnMap) -> AnnulusBand:
    return annulus_band(m.consts, m.A, m.lam)


@dataclass(frozen=True)
class InvarianceReport:
    ok: bool
    margin: float
    n_points: int

    def __bool__(self) -> bool:
        return self.ok


def check_annulus_invariance(m: ReturnMap, band: AnnulusBand,
                             n_samples: int = 1000) -> InvarianceReport:
    """Sample both boundary circles and an interior grid; images must land
    strictly inside the band. ``margin`` is the smallest clearance."""
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    xs = np.arange(n_samples) * (TWO_PI / n_samples)
    k = math.isqrt(n_samples - 1) + 1
    xi = (np.arange(k) + 0.5) * (TWO_PI / k)
    yi = band.y_lo + (np.arange(k) + 0.5) / k * (band.y_hi - band.y_lo)
    gx, gy = np.meshgrid(xi, yi)
    x = np.concatenate([xs, xs, gx.ravel()])
    y = np.concatenate([np.full(n_samples, band.y_lo), np.full(n_samples, band.y_hi),
                        gy.ravel()])
    _, Y, _ = m.lift(x, y)
    margin = float(min(np.min(Y - band.y_lo), np.min(band.y_hi - Y)))
    return InvarianceReport(margin > 0, margin, x.size)


@dataclass(frozen=True)
class Condition:
    name: str
    holds: bool
    margin: float
    detail: str = ""


@dataclass(frozen=True)
class ConditionReport:
    conditions: tuple[Condition, ...]
    norms: dict = field(default_factory=dict)

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.conditions)

    def __getitem__(self, key) -> Condition:
        if isinstance(key, int):
            return self.conditions[key - 1]
        for c in self.conditions:
            if c.name == key:
                return c
        raise KeyError(key)

    def __iter__(self):
        return iter(self.conditions)


def _extremal_angles(m: ReturnMap, y: np.ndarray) -> np.ndarray:
    """Angles where ``dF1/dx`` is extremal at height ``y`` plus where ``u`` is."""
    s = np.clip(m.lam / (y + m.A), 0.0, 1.0)
    asn = np.arcsin(s)
    cols = [np.full_like(y, 0.5 * math.pi), np.full_like(y, 1.5 * math.pi),
            math.pi + asn, TWO_PI - asn]
    return np.stack(cols, axis=1)


def _sample_partials(m: ReturnMap, x: np.ndarray, y: np.ndarray):
    d11, d12, d21, d22, _ = m.partials(x, y)
    return dict(
        min_F1x=float(np.min(d11)),
        min_abs_F1x=float(np.min(np.abs(d11))),
        sup_F1x=float(np.max(np.abs(d11))),
        sup_F1y=float(np.max(np.abs(d12))),
        sup_F2x=float(np.max(np.abs(d21))),
        sup_F2y=float(np.max(np.abs(d22))),
    )


def check_annulus_principle(m: ReturnMap, band: AnnulusBand,
                            grid: tuple[int, int] = (64, 64)) -> ConditionReport:
    """Evaluate the six annulus-principle conditions on ``band``.

    The map is written ``(x + g1, g2)`` so ``1 + dg1/dx = dF1/dx``. The
    norm of ``1 + dg1/dx`` in condition 3 is read as its infimum over the
    band (it must stay in ``(0, 1]``: the angular map is an orientation
    preserving homeomorphism); its inverse norm in condition 5 is
    ``1 / inf``. Condition 6 uses the supremum.
    """
    nx, ny = grid
    if nx < 64 or ny < 64:
        raise ValueError("grid must be at least 64 x 64")
    ys = np.linspace(band.y_lo, band.y_hi, ny)
    xs = np.arange(nx) * (TWO_PI / nx)
    gx, gy = np.meshgrid(xs, ys)
    ex = _extremal_angles(m, ys)
    x = np.concatenate([gx.ravel(), ex.ravel()])
    y = np.concatenate([gy.ravel(), np.repeat(ys, ex.shape[1])])
    nrm = _sample_partials(m, x, y)

    inf_F1x = nrm["min_F1x"] / SAFETY if nrm["min_F1x"] > 0 else nrm["min_F1x"]
    sup_F1x = nrm["sup_F1x"] * SAFETY
    g1y = nrm["sup_F1y"] * SAFETY
    g2x = nrm["sup_F2x"] * SAFETY
    g2y = nrm["sup_F2y"] * SAFETY

    inv = nrm_inv = math.inf if inf_F1x <= 0 else 1.0 / inf_F1x
    inv_report = check_annulus_invariance(m, band, max(nx * ny // 4, 100))

    conds = [Condition("periodicity", True, math.inf,
                       "g1, g2 are 2pi-periodic and smooth by construction")]
    conds.append(Condition("invariance", inv_report.ok, inv_report.margin))
    conds.append(Condition("angular_monotone", inf_F1x > 0 and inf_F1x <= 1.0,
                           inf_F1x if inf_F1x <= 1.0 else 1.0 - inf_F1x,
                           f"inf dF1/dx = {nrm['min_F1x']:.6g}"))
    conds.append(Condition("normal_contraction", g2y < 1.0, 1.0 - g2y))
    if math.isfinite(inv):
        lhs = 2.0 * math.sqrt(inv * inv * g2x * g1y)
        rhs = 1.0 - inv * g2y
        conds.append(Condition("cone", lhs < rhs, rhs - lhs))
    else:
        conds.append(Condition("cone", False, -math.inf, "dF1/dx not invertible"))
    conds.append(Condition("rate_sum", sup_F1x + g2y < 2.0, 2.0 - (sup_F1x + g2y)))
    nrm["inverse_F1x"] = nrm_inv
    return ConditionReport(tuple(conds), nrm)


Rect = tuple[float, float, float, float]


def check_abs_hyperbolicity(m: ReturnMap, region: list[Rect],
                            grid: tuple[int, int] = (64, 64)) -> ConditionReport:
    """Four-condition hyperbolicity test on a union of rectangles.

    Each rectangle is ``(x0, x1, y0, y1)``. ``||(dF1/dx)^-1||`` is
    ``1 / min |dF1/dx|``; the same inverse norm is used in condition 4.
    """
    if not region:
        raise ValueError("region must contain at least one rectangle")
    nx, ny = grid
    xs_all, ys_all = [], []
    for x0, x1, y0, y1 in region:
        if not (x1 > x0 and y1 > y0):
            raise ValueError(f"degenerate rectangle {(x0, x1, y0, y1)!r}")
        gx, gy = np.meshgrid(np.linspace(x0, x1, nx), np.linspace(y0, y1, ny))
        xs_all.append(gx.ravel())
        ys_all.append(gy.ravel())
    x = np.concatenate(xs_all)
    y = np.concatenate(ys_all)
    nrm = _sample_partials(m, x, y)
    if nrm["min_abs_F1x"] == 0:
        raise ArithmeticError("dF1/dx vanishes on the sample; condition 2 unverifiable")

    F2y = nrm["sup_F2y"] * SAFETY
    F2x = nrm["sup_F2x"] * SAFETY
    F1y = nrm["sup_F1y"] * SAFETY
    inv = SAFETY / nrm["min_abs_F1x"]
    nrm["inverse_F1x"] = inv

    lhs3 = 1.0 - F2y * inv
    rhs3 = 2.0 * math.sqrt(F2x * F1y * inv)
    lhs4 = (1.0 - F2y) * (1.0 - inv)
    rhs4 = F2x * inv * F1y
    conds = (
        Condition("normal_contraction", F2y < 1.0, 1.0 - F2y),
        Condition("angular_expansion", inv < 1.0, 1.0 - inv),
        Condition("cone", lhs3 > rhs3, lhs3 - rhs3),
        Condition("product", lhs4 > rhs4, lhs4 - rhs4),
    )
    return ConditionReport(conds, nrm)


class StripsNotFound(LookupError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class StripPair:
    I1: tuple[float, float]
    I2: tuple[float, float]
    c: float
    theta0: float
    delta0: float

    def ordered(self) -> bool:
        x1, x2 = self.I1
        x3, x4 = self.I2
        return (math.pi < self.theta0 < x1 < x2 < x3 < x4
                < 1.5 * math.pi - self.delta0)

    def rectangles(self, height: float) -> list[Rect]:
        return [(self.I1[0], self.I1[1], 0.0, height),
                (self.I2[0], self.I2[1], 0.0, height)]


def default_strip_height(m: ReturnMap) -> float:
    return 2.0 * (m.A * (1.0 + m.a)) ** m.delta


def _cover_margin(left_max: float, right_min: float, lo: float, hi: float) -> float:
    """Clearance by which ``[left_max, right_min]`` strictly contains some
    ``2 pi`` translate of ``[lo, hi]``; negative when it does not."""
    k = math.ceil((left_max - lo) / TWO_PI)
    shift = k * TWO_PI
    return min(lo + shift - left_max, right_min - (hi + shift))


def _edge_images(m: ReturnMap, x_edge: float, height: float, n: int) -> np.ndarray:
    ys = np.linspace(0.0, height, n)
    X, _, _ = m.lift(np.full(n, x_edge), ys)
    return X


def build_strips(m: ReturnMap, c: float = 0.25, n_grid: int = 256,
                 height: float | None = None) -> StripPair:
    """Place two angular intervals inside ``(theta0, 3pi/2 - delta0)`` whose
    strips each cover both by angular stretching."""
    K = m.K_omega
    a = m.a
    thr = two_turns_threshold(c, K)
    if not a > thr:
        raise StripsNotFound("stretch insufficient: a does not exceed the two-turns threshold",
                             {"a": a, "threshold": thr, "P0": stretch_P(0.0, a, c, K)})
    if height is None:
        height = default_strip_height(m)
    theta0 = math.pi + math.asin(c)
    delta0 = 1.5 * math.pi - theta0
    for _ in range(60):
        delta0 *= 0.5
        if stretch_P(delta0, a, c, K) > math.pi / c:
            break
    else:
        raise StripsNotFound("no clearance delta0 found", {"a": a})
    right = 1.5 * math.pi - delta0
    width = right - theta0
    gap = width / n_grid
    n_edge = 33
    best = None
    for i in range(2, n_grid - 1):
        s = theta0 + i * gap
        I1 = (theta0 + gap, s - 0.5 * gap)
        I2 = (s + 0.5 * gap, right - gap)
        if not (I1[1] > I1[0] and I2[1] > I2[0]):
            continue
        spans = []
        for lo, hi in (I1, I2):
            lmax = float(np.max(_edge_images(m, lo, height, n_edge)))
            rmin = float(np.min(_edge_images(m, hi, height, n_edge)))
            spans.append((lmax, rmin))
        margin = min(_cover_margin(lm, rm, *J) for lm, rm in spans for J in (I1, I2))
        if best is None or margin > best[0]:
            best = (margin, I1, I2)
    if best is None or best[0] <= 0:
        raise StripsNotFound("no covering interval pair on the search grid",
                             {"best_margin": None if best is None else best[0],
                              "theta0": theta0, "delta0": delta0})
    _, I1, I2 = best
    return StripPair(I1, I2, c, theta0, delta0)


@dataclass(frozen=True)
class HorseshoeReport:
    matrix: tuple[tuple[int, int], tuple[int, int]]
    margins: tuple[tuple[float, float], tuple[float, float]]
    height_margin: float
    monotone: bool
    escapes: int

    @property
    def full(self) -> bool:
        return self.escapes == 0 and all(v == 1 for row in self.matrix for v in row)

    @property
    def margin(self) -> float:
        return min(min(row) for row in self.margins)

    @property
    def entropy(self) -> float:
        """Log of the spectral radius of the transition matrix."""
        rho = max(abs(np.linalg.eigvals(np.array(self.matrix, dtype=float))))
        return math.log(rho) if rho > 0 else -math.inf


def verify_horseshoe(m: ReturnMap, strips: StripPair, height: float | None = None,
                     n_boundary: int = 64) -> HorseshoeReport:
    """Covering-relation check for ``H_j = I_j x [0, height]`` by boundary sampling.

    ``H_i`` covers ``H_j`` when the images of its two angular edges lie on
    opposite sides of a lift of ``I_j``, the image of its horizontal edges
    is monotone in angle, and every boundary image stays in ``(0, height)``.
    """
    if n_boundary < 4:
        raise ValueError("n_boundary must be at least 4")
    if height is None:
        height = default_strip_height(m)
    strips_x = (strips.I1, strips.I2)
    ys = np.linspace(0.0, height, n_boundary)
    escapes = 0
    spans = []
    y_images = []
    monotone = True
    for lo, hi in strips_x:
        xs = np.linspace(lo, hi, n_boundary)
        ex = np.concatenate([np.full(n_boundary, lo), np.full(n_boundary, hi), xs, xs])
        ey = np.concatenate([ys, ys, np.zeros(n_boundary), np.full(n_boundary, height)])
        X, Y, u = m.lift(ex, ey, check=False)
        bad = ~(u > 0)
        escapes += int(np.count_nonzero(bad))
        if np.any(bad):
            spans.append((math.inf, -math.inf))
            continue
        n = n_boundary
        spans.append((float(np.max(X[:n])), float(np.min(X[n:2 * n]))))
        monotone &= bool(np.all(np.diff(X[2 * n:3 * n]) > 0) and np.all(np.diff(X[3 * n:]) > 0))
        y_images.append(Y)
    if y_images:
        Yall = np.concatenate(y_images)
        hmargin = float(min(np.min(Yall), height - np.max(Yall)))
    else:
        hmargin = -math.inf
    matrix = []
    margins = []
    for lmax, rmin in spans:
        row_m = []
        row = []
        for J in strips_x:
            mg = _cover_margin(lmax, rmin, *J) if math.isfinite(lmax) else -math.inf
            row_m.append(mg)
            row.append(int(mg > 0 and hmargin > 0 and monotone))
        matrix.append(tuple(row))
        margins.append(tuple(row_m))
    return HorseshoeReport(tuple(matrix), tuple(margins), hmargin, monotone, escapes)


class Regime(enum.Enum):
    TORUS = "Torus"
    TRANSITION = "Transition"
    HORSESHOE = "Horseshoe"


@dataclass(frozen=True)
class RegimeReport:
    torus_threshold: float
    chaos_threshold: float
    a: float
    K_omega: float
    classification: Regime
    annulus_conditions: ConditionReport | None = None
    abs_conditions: ConditionReport | None = None


def classify_ratio(a: float, K_omega: float) -> Regime:
    if a < curve_g(K_omega):
        return Regime.TORUS
    if a > curve_f(K_omega):
        return Regime.HORSESHOE
    return Regime.TRANSITION


def classify(params: ModelParams, checks: bool = False, c: float = 0.25) -> RegimeReport:
    """Compare ``a`` with both thresholds; optionally run the checkers.

    With ``checks``, the annulus principle is evaluated for Torus points and
    the hyperbolicity test on freshly built strips for Horseshoe points.
    """
    v = validate(params)
    if not v.ok:
        raise ValueError("invalid parameters: " + ", ".join(v.violations))
    if not params.A > 0:
        raise ValueError("classification needs A > 0")
    consts = derive_constants(params)
    K = consts.K_omega
    a = consts.a
    regime = classify_ratio(a, K)
    ann = hyp = None
    if checks:
        m = ReturnMap(consts, params.A, params.lam)
        if regime is Regime.TORUS:
            ann = check_annulus_principle(m, band_for(m))
        elif regime is Regime.HORSESHOE:
            try:
                strips = build_strips(m, c)
            except StripsNotFound:
                pass
            else:
                hyp = check_abs_hyperbolicity(m, strips.rectangles(default_strip_height(m)))
    return RegimeReport(curve_g(K), curve_f(K), a, K, regime, ann, hyp)


__all__ = [
    "SAFETY", "curve_g", "curve_f", "two_turns_threshold", "stretch_P",
    "AnnulusBand", "annulus_band", "band_for", "check_annulus_invariance",
    "check_annulus_principle", "check_abs_hyperbolicity", "build_strips",
    "verify_horseshoe", "StripPair", "StripsNotFound", "HorseshoeReport",
    "Regime", "RegimeReport", "classify", "classify_ratio", "Condition",
    "ConditionReport", "InvarianceReport", "DomainEscape",
]
