"""Local saddle maps, transitions and the composed first-return map.

The return map acts on the outgoing wall of ``O2``::

    F(x, y) = (x - K_omega * log(u)  mod 2*pi,  u**delta),
    u = y + A + lam * sin(x).

Only the sheet ``u > 0`` is modeled; leaving it raises :class:`DomainEscape`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    TWO_PI,
    CylinderPoint,
    DerivedConstants,
    ModelParams,
    derive_constants,
    params_for,
    wrap_angle,
)


class DomainEscape(ArithmeticError):
    """The log argument ``u = y + A + lam*sin(x)`` is not positive."""

    def __init__(self, x, y, u):
        super().__init__(f"orbit left the modeled sheet: u={u!r} at x={x!r}, y={y!r}")
        self.x = x
        self.y = y
        self.u = u


# Splitting profile of the 2-D connection and its derivative. Kept in one
# place; the compiled kernels hard-code sin.
def _phi(x):
    return np.sin(x)


def _dphi(x):
    return np.cos(x)


def local_map_O1(x: float, y: float, params: ModelParams) -> tuple[float, float]:
    """Passage near ``O1``: ``(x, y) -> (y**delta1, x - omega1*log(y)/E1)``."""
    if not y > 0:
        raise ValueError(f"local map at O1 needs y > 0, got {y!r}")
    r = y ** (params.C1 / params.E1)
    phi = wrap_angle(x - params.omega1 * math.log(y) / params.E1)
    return r, phi


def local_map_O2(r: float, phi: float, params: ModelParams) -> tuple[float, float]:
    """Passage near ``O2``: ``(r, phi) -> (phi - omega2*log(r)/E2, r**delta2)``."""
    if not r > 0:
        raise ValueError(f"local map at O2 needs r > 0, got {r!r}")
    x = wrap_angle(phi - params.omega2 * math.log(r) / params.E2)
    return x, r ** (params.C2 / params.E2)


def transition_12(r: float, phi: float) -> tuple[float, float]:
    return r, phi


def transition_21(x: float, y: float, A: float, lam: float) -> tuple[float, float]:
    return x, y + A + lam * math.sin(x)


@dataclass(frozen=True)
class JacobianMatrix:
    d11: float
    d12: float
    d21: float
    d22: float

    @property
    def det(self) -> float:
        return self.d11 * self.d22 - self.d12 * self.d21

    def as_array(self) -> np.ndarray:
        return np.array([[self.d11, self.d12], [self.d21, self.d22]])


@dataclass(frozen=True)
class ReturnMap:
    """The truncated first-return map for one parameter point."""

    consts: DerivedConstants
    A: float
    lam: float

    @classmethod
    def from_params(cls, params: ModelParams) -> "ReturnMap":
        return cls(derive_constants(params), params.A, params.lam)

    @classmethod
    def from_constants(cls, delta: float, K_omega: float, A: float,
                       lam: float) -> "ReturnMap":
        return cls.from_params(params_for(delta, K_omega, A, lam))

    @property
    def delta(self) -> float:
        return self.consts.delta

    @property
    def K_omega(self) -> float:
        return self.consts.K_omega

    @property
    def a(self) -> float:
        return self.lam / self.A

    def kernel_args(self) -> tuple[float, float, float, float]:
        return self.delta, self.K_omega, self.A, self.lam

    def u(self, x, y):
        return y + self.A + self.lam * _phi(x)

    def __call__(self, p: CylinderPoint) -> CylinderPoint:
        return eval_map(self, p)

    def lift(self, x, y, check: bool = True):
        """Vectorized map without angle reduction.

        Returns ``(X, Y, u)``; ``X`` is continuous in ``x``. Raises
        :class:`DomainEscape` on the first non-positive ``u`` when ``check``.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        u = self.u(x, y)
        if check:
            _check_sheet(x, y, u)
        with np.errstate(invalid="ignore", divide="ignore"):
            X = x - self.K_omega * np.log(u)
            Y = u ** self.delta
        return X, Y, u

    def partials(self, x, y, check: bool = True):
        """Vectorized Jacobian entries ``(d11, d12, d21, d22, u)``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        u = self.u(x, y)
        if check:
            _check_sheet(x, y, u)
        c = _dphi(x)
        K = self.K_omega
        up = u ** (self.delta - 1.0)
        d11 = 1.0 - K * self.lam * c / u
        d12 = -K / u
        d21 = self.delta * self.lam * c * up
        d22 = self.delta * up
        return d11, d12 * np.ones_like(d11), d21, d22, u

    def inverse(self, X, Y):
        """Exact inverse on the sheet ``u > 0``; returns lifted ``(x, y)``.

        ``u = Y**(1/delta)`` and ``x = X + K_omega*log(u)``, so every
        preimage lies on the sheet.
        """
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        if not np.all(Y > 0):
            raise DomainEscape(X, Y, Y)
        u = Y ** (1.0 / self.delta)
        x = X + self.K_omega * np.log(u)
        y = u - self.A - self.lam * _phi(x)
        return x, y


def _check_sheet(x, y, u):
    bad = ~(u > 0)
    if np.any(bad):
        xb, yb, ub = np.broadcast_arrays(x, y, u)
        i = int(np.argmax(np.ravel(bad)))
        raise DomainEscape(float(xb.ravel()[i]), float(yb.ravel()[i]), float(ub.ravel()[i]))


def eval_map(m: ReturnMap, p: CylinderPoint) -> CylinderPoint:
    x, y = p.x, p.y
    u = y + m.A + m.lam * math.sin(x)
    if not u > 0:
        raise DomainEscape(x, y, u)
    return CylinderPoint(x - m.K_omega * math.log(u), u ** m.delta)


def jacobian(m: ReturnMap, p: CylinderPoint) -> JacobianMatrix:
    x, y = p.x, p.y
    u = y + m.A + m.lam * math.sin(x)
    if not u > 0:
        raise DomainEscape(x, y, u)
    c = math.cos(x)
    K = m.K_omega
    up = u ** (m.delta - 1.0)
    return JacobianMatrix(
        d11=1.0 - K * m.lam * c / u,
        d12=-K / u,
        d21=m.delta * m.lam * c * up,
        d22=m.delta * up,
    )


def compose_local(m: ReturnMap, params: ModelParams, p: CylinderPoint) -> CylinderPoint:
    """Return map assembled from its pieces: transition 2->1, then the saddles.

    Used as an independent check of :func:`eval_map`.
    """
    x, y = transition_21(p.x, p.y, m.A, m.lam)
    r, phi = local_map_O1(x, y, params)
    r, phi = transition_12(r, phi)
    X, Y = local_map_O2(r, phi, params)
    return CylinderPoint(X, Y)


def angle_gap(x1, x2):
    """Vectorized circle distance."""
    d = np.abs(np.mod(np.asarray(x1) - np.asarray(x2), TWO_PI))
    return np.minimum(d, TWO_PI - d)
