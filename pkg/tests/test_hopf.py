import math

import numpy as np
import pytest

from bykov.hopf import (
    DegenerateCoefficients,
    HopfField,
    HopfParams,
    NoEquilibrium,
    Section,
    ahc_line,
    contraction_exponent,
    equilibria_and_eigenvalues,
    field_order2,
    field_order3,
    first_integral_G,
    fit_contraction,
    integrate,
    lift_and_section,
    locate_ahc,
    numeric_jacobian,
)

UNIT = HopfParams(0.0, 1.0, 1.0)
CUBIC = dict(c=0.0, d=-2.0, e=-1.0, f=0.0)


def test_order2_field_value():
    assert field_order2((1.0, 0.5), HopfParams(0.1, 0.2, 1.0)) == pytest.approx((0.6, -1.05))


def test_order3_reduces_to_order2_without_cubic_terms():
    p = HopfParams(0.1, 0.2, 1.3)
    assert field_order3((0.4, -0.3), p) == pytest.approx(field_order2((0.4, -0.3), p))


def test_axis_equilibria_order2():
    top, bot = equilibria_and_eigenvalues(UNIT, 2)[:2]
    assert (top.state.z, bot.state.z) == (1.0, -1.0)
    assert (top.radial_eig, top.axial_eig) == (1.0, -2.0)
    assert (bot.radial_eig, bot.axial_eig) == (-1.0, 2.0)


@pytest.mark.parametrize("order", [2, 3])
def test_eigenvalues_match_numeric_jacobian(order):
    p = HopfParams(0.02, 0.3, 0.8, c=0.1, d=-0.5, e=-0.7, f=0.2)
    for eq in equilibria_and_eigenvalues(p, order):
        J = numeric_jacobian(HopfField(p, order), eq.state.r, eq.state.z)
        ev = sorted(np.linalg.eigvals(J), key=lambda v: (v.real, v.imag))
        mine = sorted([complex(eq.radial_eig), complex(eq.axial_eig)], key=lambda v: (v.real, v.imag))
        np.testing.assert_allclose(ev, mine, atol=1e-7)


def test_center_exists_inside_wedge():
    eqs = equilibria_and_eigenvalues(HopfParams(0.1, 0.2, 1.0), 2)
    center = [e for e in eqs if e.kind == "center"]
    assert len(center) == 1
    assert center[0].state.z == pytest.approx(-0.1)
    assert center[0].state.r == pytest.approx(math.sqrt(0.19))


def test_no_axis_equilibria_below_zero():
    with pytest.raises(NoEquilibrium):
        equilibria_and_eigenvalues(HopfParams(0.0, -0.1), 2)


def test_order_must_be_two_or_three():
    with pytest.raises(ValueError):
        equilibria_and_eigenvalues(UNIT, 4)


def test_parameters_validate_second_order_coefficient():
    with pytest.raises(ValueError):
        HopfParams(0.0, 1.0, a_h=0.0)


def test_first_integral_is_conserved():
    tr = integrate(HopfField(UNIT, 2), (0.5, 0.0), (0.0, 10.0), 1e-3)
    g = [first_integral_G((r, z), UNIT) for r, z in zip(tr.r, tr.z)]
    assert max(abs(v - g[0]) for v in g) < 1e-8


def test_first_integral_rejects_negative_radius():
    with pytest.raises(ValueError):
        first_integral_G((-1.0, 0.0), UNIT)


def test_kernel_path_matches_python_integrator():
    from bykov.hopf import _integrate_python
    p = HopfParams(0.01, 0.5, 1.2, **CUBIC)
    f = HopfField(p, 3)
    tr = integrate(f, (0.3, 0.1), (0.0, 2.0), 1e-2)
    rs, zs, _ = _integrate_python(f, 0.3, 0.1, 1e-2, 200)
    np.testing.assert_allclose(tr.r, rs, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(tr.z, zs, rtol=1e-12, atol=1e-14)


def test_integrate_generic_callable():
    tr = integrate(lambda r, z: (-r, 0.0), (1.0, 0.0), (0.0, 1.0), 1e-3)
    assert tr.r[-1] == pytest.approx(math.exp(-1.0), rel=1e-12)


@pytest.mark.parametrize("h,span", [(0.0, (0, 1)), (1e-3, (1, 0))])
def test_integrate_argument_checks(h, span):
    with pytest.raises(ValueError):
        integrate(HopfField(UNIT, 2), (0.5, 0.0), span, h)


def test_open_conditions_and_line():
    p = HopfParams(0.0, 0.04, **CUBIC)
    assert p.open_conditions()
    assert ahc_line(**CUBIC) == pytest.approx(0.8)
    with pytest.raises(DegenerateCoefficients):
        ahc_line(0.0, 0.0, 1.0, 0.0)


def test_contraction_exponent_order2_formula():
    p = HopfParams(0.0, 0.25, 1.0)
    s = 0.5
    # C1=2s, E1=s, C2=s, E2=2s
    assert contraction_exponent(p, 2) == pytest.approx((2 * s / s) * (s / (2 * s)))


def test_section_direction_is_checked():
    with pytest.raises(ValueError):
        Section(0.0, 0)


def test_section_hits_are_on_the_plane():
    # closed level curves of the first integral around the center
    smp = lift_and_section(UNIT, 2, Section(0.0, 1), 5, (0.5, 0.0), h=1e-2, t_max=200.0)
    np.testing.assert_allclose(smp.r, smp.r[0], rtol=1e-6)
    assert smp.r.size == 5
    assert np.all(np.diff(smp.t) > 0)
    assert np.all((smp.theta >= 0) & (smp.theta < 2 * math.pi))
    a, b = smp.pairs()
    assert a.shape == b.shape == (4, 2)


def test_locate_connection_between_axis_equilibria():
    p = locate_ahc(HopfParams(0.0, 0.04, **CUBIC), (0.02, 0.035))
    assert p.mu1 == pytest.approx(0.0327493613, abs=1e-8)


def test_fit_needs_enough_samples():
    from bykov.hopf import SectionSamples
    lr = np.array([-1.0, -2.0, -15.0])
    s = SectionSamples(np.zeros(3), np.zeros(3), np.exp(lr), lr)
    with pytest.raises(ValueError):
        fit_contraction(s)


def test_fit_recovers_synthetic_exponent():
    from bykov.hopf import SectionSamples
    lr = [-0.5]
    for _ in range(8):
        lr.append(1.7 * lr[-1] - 0.3)
    lr = np.array(lr)
    s = SectionSamples(np.arange(lr.size), np.zeros(lr.size), np.exp(lr), lr)
    assert fit_contraction(s, floor=-1e9) == pytest.approx(1.7, rel=1e-12)
