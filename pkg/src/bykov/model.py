"""Parameter records for the two-parameter Bykov unfolding.

A model point is the eigenvalue data of the two saddle-foci plus the two
splitting amplitudes ``A`` (one-dimensional connection offset) and ``lam``
(amplitude of the sinusoidal splitting of the two-dimensional connection).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

TWO_PI = 2.0 * math.pi

#: Half-width of the cross-section domain after rescaling.
EPSILON = 1.0


def wrap_angle(x: float) -> float:
    """Reduce an angle into ``[0, 2*pi)``."""
    r = x - TWO_PI * math.floor(x / TWO_PI)
    # tiny negative x: floor can leave r == 2*pi, or x / 2pi underflows to -0
    return 0.0 if (r >= TWO_PI or r < 0.0) else r


def circle_distance(x1: float, x2: float) -> float:
    """Distance between two angles measured on the circle."""
    d = abs(wrap_angle(x1) - wrap_angle(x2))
    return min(d, TWO_PI - d)


@dataclass(frozen=True)
class ModelParams:
    """Saddle-focus eigenvalue data and unfolding parameters.

    ``O1`` has eigenvalues ``E1`` and ``-C1 +- i omega1``; ``O2`` has
    ``-C2`` and ``E2 +- i omega2``.
    """

    C1: float
    E1: float
    omega1: float
    C2: float
    E2: float
    omega2: float
    A: float = 0.0
    lam: float = 0.0

    def with_unfolding(self, A: float, lam: float) -> "ModelParams":
        return ModelParams(self.C1, self.E1, self.omega1, self.C2, self.E2,
                           self.omega2, A, lam)


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate(params: ModelParams) -> ValidationResult:
    """Check the standing hypotheses; violations are returned, never raised.

    ``A = lam = 0`` (the organizing center) is accepted. Any other point
    must satisfy ``A > lam >= 0``.
    """
    p = params
    checks = [
        ("P2a: C1>E1", p.C1 > p.E1),
        ("P2a: E1>0", p.E1 > 0),
        ("P2a: omega1>0", p.omega1 > 0),
        ("P2b: C2>E2", p.C2 > p.E2),
        ("P2b: E2>0", p.E2 > 0),
        ("P2b: omega2>0", p.omega2 > 0),
        ("P7b: lambda>=0", p.lam >= 0),
    ]
    if not (p.A == 0 and p.lam == 0):
        checks.append(("P7b: A>lambda", p.A > p.lam))
    values = (p.C1, p.E1, p.omega1, p.C2, p.E2, p.omega2, p.A, p.lam)
    if not all(math.isfinite(v) for v in values):
        checks.append(("finite: all parameters finite", False))
    return ValidationResult(tuple(name for name, good in checks if not good))


@dataclass(frozen=True)
class DerivedConstants:
    delta1: float
    delta2: float
    delta: float
    K: float
    K_omega: float
    A: float = 0.0
    lam: float = 0.0

    @property
    def a(self) -> float:
        """Ratio ``lam / A``; undefined at ``A = 0``."""
        if self.A == 0:
            raise ZeroDivisionError("a = lambda/A is undefined for A = 0")
        return self.lam / self.A


def derive_constants(params: ModelParams) -> DerivedConstants:
    p = params
    delta1 = p.C1 / p.E1
    delta2 = p.C2 / p.E2
    return DerivedConstants(
        delta1=delta1,
        delta2=delta2,
        delta=delta1 * delta2,
        K=(p.E2 + p.C1) / (p.E1 * p.E2),
        K_omega=(p.E2 * p.omega1 + p.C1 * p.omega2) / (p.E1 * p.E2),
        A=p.A,
        lam=p.lam,
    )


def params_for(delta: float, K_omega: float, A: float = 0.0,
               lam: float = 0.0) -> ModelParams:
    """Build a parameter point realizing prescribed ``delta`` and ``K_omega``.

    Uses symmetric saddles: ``E1 = E2 = 1``, ``C1 = C2 = sqrt(delta)`` and
    equal spins.
    """
    if not delta > 1:
        raise ValueError("delta must exceed 1")
    if not K_omega > 0:
        raise ValueError("K_omega must be positive")
    s = math.sqrt(delta)
    w = K_omega / (1.0 + s)
    return ModelParams(C1=s, E1=1.0, omega1=w, C2=s, E2=1.0, omega2=w,
                       A=A, lam=lam)


@dataclass(frozen=True)
class CylinderPoint:
    """Point ``(x mod 2*pi, y)`` on the outgoing wall of the second saddle."""

    x: float
    y: float = field(default=0.0)

    def __post_init__(self):
        object.__setattr__(self, "x", wrap_angle(float(self.x)))
        object.__setattr__(self, "y", float(self.y))

    def __iter__(self):
        yield self.x
        yield self.y
