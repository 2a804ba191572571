import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bykov.model import (
    TWO_PI,
    CylinderPoint,
    ModelParams,
    circle_distance,
    derive_constants,
    params_for,
    validate,
    wrap_angle,
)

from .conftest import TORUS_PARAMS


def test_reference_point_is_valid():
    assert validate(TORUS_PARAMS).ok


def test_swapped_rates_flag_first_saddle():
    p = ModelParams(0.9, 1.1, 1.0, 1.1, 0.9, 1.0, 0.01, 0.002)
    assert "P2a: C1>E1" in validate(p).violations


def test_lambda_above_offset_is_reported():
    p = TORUS_PARAMS.with_unfolding(0.001, 0.002)
    result = validate(p)
    assert not result
    assert result.violations == ("P7b: A>lambda",)


def test_organizing_center_is_accepted():
    assert validate(TORUS_PARAMS.with_unfolding(0.0, 0.0)).ok


def test_non_finite_values_are_violations():
    p = TORUS_PARAMS.with_unfolding(math.nan, 0.0)
    assert "finite: all parameters finite" in validate(p).violations


def test_ratios_of_integer_rates():
    dc = derive_constants(ModelParams(2, 1, 1, 3, 1, 1))
    assert (dc.delta1, dc.delta2, dc.delta) == (2, 3, 6)


def test_unit_rates_give_twice_unit_spin():
    dc = derive_constants(ModelParams(1.0, 1.0, 1.0, 1.5, 1.0, 1.0))
    assert dc.K_omega == 2.0
    assert dc.K == 2.0


def test_reference_spin_constant():
    dc = derive_constants(TORUS_PARAMS)
    # desk value: (0.9 + 1.1) / 0.81
    assert dc.K_omega == pytest.approx(2.0 / 0.81, rel=1e-15)
    assert dc.K_omega == pytest.approx(2.469136, abs=1e-6)
    assert dc.a == pytest.approx(0.2)


def test_ratio_undefined_at_zero_offset():
    with pytest.raises(ZeroDivisionError):
        derive_constants(TORUS_PARAMS.with_unfolding(0.0, 0.0)).a


@given(delta=st.floats(1.01, 10.0), K=st.floats(0.01, 100.0))
def test_params_for_round_trip(delta, K):
    dc = derive_constants(params_for(delta, K))
    assert dc.delta == pytest.approx(delta, rel=1e-12)
    assert dc.K_omega == pytest.approx(K, rel=1e-12)


@given(st.floats(-1e6, 1e6))
def test_wrap_lands_in_half_open_circle(x):
    w = wrap_angle(x)
    assert 0.0 <= w < TWO_PI
    assert circle_distance(w, x) < 1e-9 * max(1.0, abs(x))


def test_cylinder_point_reduces_angle():
    p = CylinderPoint(-0.5, 2.0)
    assert p.x == pytest.approx(TWO_PI - 0.5)
    assert tuple(p) == (p.x, 2.0)


def test_tiny_negative_angle_does_not_reach_two_pi():
    assert wrap_angle(-1e-20) == 0.0
