"""Invariant circle of the return map by graph transform.

A candidate circle ``y = h(x)`` is stored at ``N`` equispaced nodes and
evaluated between nodes by its trigonometric interpolant. One transform
step maps the curve forward and reads the image back as a graph over the
same nodes: for each node angle ``xi`` the lifted angular map
``x -> x - K_omega*log(h(x) + A + lam*sin(x))`` is inverted and the new
height is ``u**delta`` at the preimage.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..maps import ReturnMap
from ..model import TWO_PI
from ..regimes import AnnulusBand


class FoldDetected(ArithmeticError):
    """The image of the current curve is no longer a graph over the angle."""

    def __init__(self, iteration: int, index: int):
        super().__init__(f"image angle not monotone at node {index} (iteration {iteration})")
        self.iteration = iteration
        self.index = index


class NoConvergence(ArithmeticError):
    def __init__(self, iterations: int, change: float):
        super().__init__(f"graph transform did not converge in {iterations} iterations "
                         f"(last sup change {change:.3e})")
        self.iterations = iterations
        self.change = change


class TrigInterpolant:
    """Real trigonometric interpolant of equispaced periodic samples."""

    def __init__(self, values: np.ndarray):
        v = np.asarray(values, dtype=float)
        n = v.size
        c = np.fft.rfft(v) / n
        c[1:] *= 2.0
        if n % 2 == 0:
            # the Nyquist mode is real and counted once
            c[-1] = 0.5 * c[-1].real
        self._c = c
        self._k = np.arange(c.size, dtype=float)

    def __call__(self, x, derivative: bool = False):
        x = np.asarray(x, dtype=float)
        phase = np.exp(1j * np.multiply.outer(x, self._k))
        val = (phase @ self._c).real
        if not derivative:
            return val
        der = (phase @ (1j * self._k * self._c)).real
        return val, der


@dataclass(frozen=True)
class CircleGraph:
    """Node heights of an invariant circle ``y = h(x)``."""

    heights: np.ndarray
    iterations: int
    residual: float
    change: float

    @property
    def N(self) -> int:
        return self.heights.size

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.N) * (TWO_PI / self.N)

    def __call__(self, x):
        return TrigInterpolant(self.heights)(x)

    def within(self, band: AnnulusBand) -> bool:
        return bool(np.all(band.contains(self.heights)))


def _lifted_images(m: ReturnMap, x: np.ndarray, h: np.ndarray) -> np.ndarray:
    X, _, _ = m.lift(x, h)
    return X


def _invert_angle(m: ReturnMap, interp: TrigInterpolant, nodes: np.ndarray,
                  X: np.ndarray, targets: np.ndarray, xtol: float = 4e-15,
                  max_newton: int = 60) -> np.ndarray:
    """Solve ``x - K log(h(x)+A+lam sin x) = target`` for each target.

    ``X`` are the lifted images of ``nodes``, strictly increasing, and the
    targets lie in ``[X[0], X[0] + 2 pi)``. Safeguarded Newton inside the
    node bracket; bisection whenever a step leaves it.
    """
    N = nodes.size
    Xe = np.append(X, X[0] + TWO_PI)
    xe = np.append(nodes, TWO_PI)
    idx = np.clip(np.searchsorted(Xe, targets, side="right") - 1, 0, N - 1)
    lo = xe[idx].copy()
    hi = xe[idx + 1].copy()
    t = (targets - Xe[idx]) / (Xe[idx + 1] - Xe[idx])
    x = lo + t * (hi - lo)
    K, A, lam = m.K_omega, m.A, m.lam
    active = np.ones(N, dtype=bool)
    for _ in range(max_newton):
        xa = x[active]
        hv, hd = interp(xa, derivative=True)
        u = hv + A + lam * np.sin(xa)
        G = xa - K * np.log(u) - targets[active]
        dG = 1.0 - K * (hd + lam * np.cos(xa)) / u
        lo_a, hi_a = lo[active], hi[active]
        lo_a = np.where(G < 0, xa, lo_a)
        hi_a = np.where(G > 0, xa, hi_a)
        step = G / dG
        xn = xa - step
        out = ~((xn > lo_a) & (xn < hi_a)) | ~(dG > 0)
        xn = np.where(out, 0.5 * (lo_a + hi_a), xn)
        lo[active], hi[active] = lo_a, hi_a
        done = (np.abs(xn - xa) <= xtol * (1.0 + np.abs(xa))) | (G == 0)
        x[active] = xn
        ai = np.flatnonzero(active)
        active[ai[done]] = False
        if not active.any():
            break
    return x


def graph_transform(m: ReturnMap, band: AnnulusBand, N: int = 1024, tol: float = 1e-12,
                    max_iter: int = 500, h0=None) -> CircleGraph:
    """Iterate the graph transform until the sup-norm change drops below ``tol``.

    Parameters
    ----------
    m : ReturnMap
    band : AnnulusBand
        Supplies the starting curve (the band midline) when ``h0`` is None.
    N : int
        Number of nodes, a power of two.
    tol : float
        Stopping threshold on ``max |h_new - h|``.
    max_iter : int
    h0 : array_like, optional
        Starting node heights.

    Returns
    -------
    CircleGraph
        Carries the invariance residual ``max |F2(x_i, h_i) - h(F1(x_i, h_i))|``.

    Raises
    ------
    FoldDetected
        If the lifted image angles of the nodes are not strictly increasing.
    NoConvergence
        If ``max_iter`` steps do not reach ``tol``.
    """
    if N < 8 or N & (N - 1):
        raise ValueError("N must be a power of two, at least 8")
    if not tol > 0:
        raise ValueError("tol must be positive")
    nodes = np.arange(N) * (TWO_PI / N)
    if h0 is None:
        h = np.full(N, 0.5 * (band.y_lo + band.y_hi))
    else:
        h = np.broadcast_to(np.asarray(h0, dtype=float), (N,)).copy()
    change = math.inf
    for it in range(1, max_iter + 1):
        X = _lifted_images(m, nodes, h)
        steps = np.diff(np.append(X, X[0] + TWO_PI))
        if not np.all(steps > 0):
            raise FoldDetected(it, int(np.argmin(steps)))
        shift = TWO_PI * np.ceil((X[0] - nodes) / TWO_PI)
        targets = nodes + shift
        interp = TrigInterpolant(h)
        xs = _invert_angle(m, interp, nodes, X, targets)
        u = interp(xs) + m.A + m.lam * np.sin(xs)
        h_new = u ** m.delta
        change = float(np.max(np.abs(h_new - h)))
        h = h_new
        if change < tol:
            return CircleGraph(h, it, invariance_residual(m, h), change)
    raise NoConvergence(max_iter, change)


def invariance_residual(m: ReturnMap, heights: np.ndarray) -> float:
    """``max_i |F2(x_i, h_i) - h(F1(x_i, h_i))|`` with ``h`` interpolated."""
    heights = np.asarray(heights, dtype=float)
    N = heights.size
    nodes = np.arange(N) * (TWO_PI / N)
    X, Y, _ = m.lift(nodes, heights)
    return float(np.max(np.abs(Y - TrigInterpolant(heights)(X))))
