"""Orbit iteration, rotation numbers and Lyapunov exponents."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .._backend import kernels as _default_kernels
from .._backend import get_kernels
from ..maps import ReturnMap
from ..model import TWO_PI, CylinderPoint


def _kern(backend):
    return _default_kernels if backend is None else get_kernels(backend)


@dataclass(frozen=True)
class OrbitRecord:
    """Recorded iterates after the transient.

    ``xs`` and ``ys`` hold the angle (reduced) and height of each recorded
    point; ``escape_index`` is the number of completed iterations before
    the orbit left the sheet ``u > 0``.
    """

    xs: np.ndarray
    ys: np.ndarray
    escaped: bool
    escape_index: int | None

    @property
    def points(self) -> list[CylinderPoint]:
        return [CylinderPoint(x, y) for x, y in zip(self.xs, self.ys)]

    def __len__(self) -> int:
        return len(self.xs)


def iterate(m: ReturnMap, p0, n: int, transient: int = 0,
            backend: str | None = None) -> OrbitRecord:
    """Iterate ``m`` from ``p0``; escape is reported as data, never raised."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if transient < 0:
        raise ValueError("transient must be non-negative")
    x0, y0 = p0
    xs, ys, esc = _kern(backend).orbit(float(x0), float(y0), int(n), int(transient),
                                       *m.kernel_args())
    esc = int(esc)
    return OrbitRecord(np.asarray(xs), np.asarray(ys), esc >= 0, esc if esc >= 0 else None)


@dataclass(frozen=True)
class RotationEstimate:
    rho: float
    converged: bool
    rho_half: float
    n: int

    @property
    def frac(self) -> float:
        """Rotation number reduced to ``[0, 1)``."""
        return self.rho - math.floor(self.rho)

    def distance_to_integer(self) -> float:
        f = self.frac
        return min(f, 1.0 - f)


def rotation_number(m: ReturnMap, circle, n: int = 1_000_000, transient: int = 0,
                    tol: float = 1e-6, backend: str | None = None) -> RotationEstimate:
    """Birkhoff average of the lifted angular increment, in turns per iterate.

    The orbit starts on the invariant circle at ``(0, h(0))`` and is followed
    with the full planar map, which keeps it on the attracting circle without
    relying on interpolation between nodes. ``circle`` may be a
    :class:`CircleGraph` or a plain starting height.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    y0 = circle.heights[0] if hasattr(circle, "heights") else float(circle)
    s_half, s_full, esc = _kern(backend).rotation(0.0, float(y0), int(n), int(transient),
                                                  *m.kernel_args())
    if esc >= 0:
        raise ArithmeticError(f"orbit escaped after {esc} iterations")
    half = n // 2
    rho = s_full / (n * TWO_PI)
    rho_half = s_half / (half * TWO_PI)
    return RotationEstimate(rho, abs(rho - rho_half) < tol, rho_half, n)


def birkhoff_rotation(lift: Callable[[float], float], x0: float, n: int,
                      tol: float = 1e-6) -> RotationEstimate:
    """Rotation number of an arbitrary circle-map lift ``x -> lift(x)``.

    Uses the same estimator as :func:`rotation_number` but with a Python
    callable, for testing against simple stubs.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    x = x0
    half = n // 2
    total = 0.0
    s_half = 0.0
    for i in range(n):
        X = lift(x)
        total += X - x
        x = X - TWO_PI * math.floor(X / TWO_PI)
        if i + 1 == half:
            s_half = total
    rho = total / (n * TWO_PI)
    rho_half = s_half / (half * TWO_PI)
    return RotationEstimate(rho, abs(rho - rho_half) < tol, rho_half, n)


class DeterminantMismatch(AssertionError):
    """Exponent sum disagrees with the orbit average of ``log det``."""


@dataclass(frozen=True)
class LyapunovEstimate:
    lam_max: float
    lam_sum: float
    escaped: bool
    n: int
    lam_min: float
    mean_log_det: float

    def __iter__(self):
        yield self.lam_max
        yield self.lam_sum
        yield self.escaped


def lyapunov_spectrum(m: ReturnMap, p0, n: int, transient: int = 1000,
                      backend: str | None = None, det_tol: float = 1e-8) -> LyapunovEstimate:
    """Both exponents from QR-renormalized Jacobian products.

    An escaped orbit returns NaN exponents with ``escaped`` set. Otherwise the
    exponent sum is compared against the orbit average of
    ``log(delta * u**(delta-1))`` and a :class:`DeterminantMismatch` is
    raised if they differ by more than ``det_tol``.
    """
    if n < 1000:
        raise ValueError("n must be at least 1000")
    x0, y0 = p0
    s1, s2, sd, n_done, esc, _, _ = _kern(backend).lyapunov(
        float(x0), float(y0), int(n), int(transient), *m.kernel_args())
    if esc >= 0:
        nan = math.nan
        return LyapunovEstimate(nan, nan, True, int(n_done), nan, nan)
    l1 = s1 / n_done
    l2 = s2 / n_done
    md = sd / n_done
    if abs((l1 + l2) - md) > det_tol:
        raise DeterminantMismatch(f"exponent sum {l1 + l2!r} vs mean log det {md!r}")
    return LyapunovEstimate(max(l1, l2), l1 + l2, False, int(n_done), min(l1, l2), md)
