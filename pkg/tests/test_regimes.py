import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bykov.maps import ReturnMap
from bykov.model import derive_constants, params_for
from bykov.regimes import (
    Regime,
    StripPair,
    StripsNotFound,
    annulus_band,
    band_for,
    build_strips,
    check_abs_hyperbolicity,
    check_annulus_invariance,
    check_annulus_principle,
    classify,
    curve_f,
    curve_g,
    default_strip_height,
    stretch_P,
    two_turns_threshold,
    verify_horseshoe,
)

from .conftest import K_HORSESHOE, TORUS_PARAMS


def test_torus_curve_values():
    assert curve_g(1e-9) == pytest.approx(1.0)
    assert curve_g(math.sqrt(3)) == pytest.approx(0.5, rel=1e-15)
    assert curve_g(1.0) == pytest.approx(0.7071068, abs=1e-7)


def test_horseshoe_curve_values():
    assert curve_f(1e-3) == 1.0
    assert curve_f(K_HORSESHOE) == pytest.approx(4 / 7, rel=1e-14)
    assert curve_f(4 * math.pi / math.log(5)) == pytest.approx(16 / 19, rel=1e-14)


def test_curves_reject_nonpositive_spin():
    with pytest.raises(ValueError):
        curve_g(0.0)
    with pytest.raises(ValueError):
        curve_f(-1.0)


@given(st.floats(1e-3, 1e3))
def test_torus_threshold_below_horseshoe_threshold(K):
    assert curve_g(K) < curve_f(K)


def test_two_turn_threshold_values():
    assert two_turns_threshold(0.25, K_HORSESHOE) == pytest.approx(4 / 7, rel=1e-14)
    assert two_turns_threshold(0.25, 1e-4) == 1.0
    with pytest.raises(ValueError):
        two_turns_threshold(1.0, 2.0)


def test_two_turn_threshold_is_the_stretch_root():
    # independent route: solve P(0, a) = pi/c by bisection
    c, K = 0.3, 7.0
    lo, hi = 0.0, 0.999
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if stretch_P(0.0, mid, c, K) > math.pi / c:
            hi = mid
        else:
            lo = mid
    assert two_turns_threshold(c, K) == pytest.approx(lo, abs=1e-12)


def test_stretch_zero_cases():
    assert stretch_P(0.7, 0.0, 0.25, 3.0) == 0.0
    assert stretch_P(math.acos(0.25), 0.5, 0.25, 3.0) == pytest.approx(0.0, abs=1e-15)


def test_stretch_reference_value():
    expected = K_HORSESHOE * math.log(0.775 / 0.1)
    assert stretch_P(0.0, 0.9, 0.25, K_HORSESHOE) == pytest.approx(expected, rel=1e-14)


def test_band_values():
    dc = derive_constants(params_for(2.0, 1.0))
    band = annulus_band(dc, 0.1, 0.05)
    assert (band.y_lo, band.y_hi) == (pytest.approx(0.0025), pytest.approx(0.045))
    band0 = annulus_band(dc, 0.1, 0.0)
    assert (band0.y_lo, band0.y_hi) == (pytest.approx(0.01), pytest.approx(0.02))
    assert annulus_band(dc, 0.1, 0.1 * (1 - 1e-9)).y_lo < 1e-15


def test_band_rejects_ratio_above_one():
    dc = derive_constants(params_for(2.0, 1.0))
    with pytest.raises(ValueError):
        annulus_band(dc, 0.1, 0.2)


def test_invariance_reference_point(torus_map):
    rep = check_annulus_invariance(torus_map, band_for(torus_map), 1000)
    assert rep.ok and rep.margin > 0


def test_invariance_dense_recheck(torus_map):
    # oracle: 1e5 uniformly random points of the band
    band = band_for(torus_map)
    rng = np.random.default_rng(3)
    x = rng.uniform(0, 2 * math.pi, 100_000)
    y = rng.uniform(band.y_lo, band.y_hi, 100_000)
    _, Y, _ = torus_map.lift(x, y)
    assert np.all((Y > band.y_lo) & (Y < band.y_hi))


@pytest.mark.parametrize("A", [1e-4, 1e-3, 0.01, 0.1])
def test_invariance_without_splitting(A):
    m = ReturnMap.from_constants(1.6, 2.0, A, 0.0)
    assert check_annulus_invariance(m, band_for(m))


def test_principle_all_hold_at_small_offset():
    m = ReturnMap.from_params(TORUS_PARAMS.with_unfolding(1e-4, 2e-5))
    rep = check_annulus_principle(m, band_for(m))
    assert rep.all_hold, rep.conditions
    assert all(c.margin > 0 for c in rep)


def test_principle_cone_condition_at_reference_offset(torus_map):
    # the annulus and the monotone angular map are fine, but the cone
    # condition (5) is not met at A = 0.01 by sampled norms
    rep = check_annulus_principle(torus_map, band_for(torus_map))
    assert rep["invariance"].holds and rep["angular_monotone"].holds
    assert not rep[5].holds


def test_principle_monotonicity_fails_beyond_torus_curve():
    K = derive_constants(TORUS_PARAMS).K_omega
    a = 1.1 * curve_g(K)
    m = ReturnMap.from_params(TORUS_PARAMS.with_unfolding(0.01, a * 0.01))
    rep = check_annulus_principle(m, band_for(m))
    assert not rep["angular_monotone"].holds


def test_principle_without_splitting_is_monotone():
    m = ReturnMap.from_params(TORUS_PARAMS.with_unfolding(0.01, 0.0))
    rep = check_annulus_principle(m, band_for(m))
    assert rep[3].holds
    assert rep.norms["min_F1x"] == 1.0


def test_principle_grid_floor(torus_map):
    with pytest.raises(ValueError):
        check_annulus_principle(torus_map, band_for(torus_map), (32, 64))


def test_strips_for_horseshoe_point(horseshoe_map):
    s = build_strips(horseshoe_map, 0.25)
    assert s.ordered()
    rep = verify_horseshoe(horseshoe_map, s)
    assert rep.full
    assert rep.entropy == pytest.approx(math.log(2))


def test_strip_covering_dense_recheck(horseshoe_map):
    # oracle: dense sampling of the whole strip, not just its boundary
    s = build_strips(horseshoe_map, 0.25)
    h = default_strip_height(horseshoe_map)
    for lo, hi in (s.I1, s.I2):
        gx, gy = np.meshgrid(np.linspace(lo, hi, 400), np.linspace(0, h, 200))
        X, Y, _ = horseshoe_map.lift(gx, gy)
        assert np.all((Y > 0) & (Y < h))
        # the left edge image stays left of both strips' lifts, the right edge right of them
        for J in (s.I1, s.I2):
            k = math.ceil((X[:, 0].max() - J[0]) / (2 * math.pi))
            assert X[:, -1].min() > J[1] + 2 * math.pi * k


def test_strips_not_found_below_threshold():
    m = ReturnMap.from_constants(2.0, K_HORSESHOE, 0.01, 0.005)
    with pytest.raises(StripsNotFound):
        build_strips(m, 0.25)


def test_strips_need_c_below_one(horseshoe_map):
    with pytest.raises(ValueError):
        build_strips(horseshoe_map, 1.0)


def test_torus_point_has_no_covering(torus_map, horseshoe_map):
    s = build_strips(horseshoe_map, 0.25)
    rep = verify_horseshoe(torus_map, s, default_strip_height(torus_map))
    assert not rep.full


def test_verify_boundary_floor(horseshoe_map):
    s = StripPair((3.4, 3.7), (3.8, 4.0), 0.25, 3.39, 0.66)
    with pytest.raises(ValueError):
        verify_horseshoe(horseshoe_map, s, n_boundary=3)


def test_hyperbolicity_on_strips(horseshoe_map):
    s = build_strips(horseshoe_map, 0.25)
    rep = check_abs_hyperbolicity(horseshoe_map, s.rectangles(default_strip_height(horseshoe_map)))
    assert rep.all_hold
    assert all(c.margin > 0 for c in rep)


def test_hyperbolicity_expansion_fails_without_splitting():
    m = ReturnMap.from_constants(2.0, K_HORSESHOE, 0.01, 0.0)
    rep = check_abs_hyperbolicity(m, [(3.4, 4.0, 0.0, 1e-4)])
    assert not rep["angular_expansion"].holds


def test_hyperbolicity_rejects_flat_rectangle(horseshoe_map):
    with pytest.raises(ValueError):
        check_abs_hyperbolicity(horseshoe_map, [(3.4, 3.4, 0.0, 1e-4)])


@pytest.mark.parametrize("a,K,expected", [
    (0.2, None, Regime.TORUS),
    (0.9, K_HORSESHOE, Regime.HORSESHOE),
    (0.5, K_HORSESHOE, Regime.TRANSITION),
])
def test_classification(a, K, expected):
    if K is None:
        p = TORUS_PARAMS
    else:
        p = params_for(2.0, K, 0.01, a * 0.01)
    rep = classify(p)
    assert rep.classification is expected
    assert rep.a == pytest.approx(a)


def test_classification_runs_checkers():
    rep = classify(params_for(2.0, K_HORSESHOE, 0.01, 0.009), checks=True)
    assert rep.abs_conditions is not None and rep.abs_conditions.all_hold
    rep = classify(TORUS_PARAMS.with_unfolding(1e-4, 2e-5), checks=True)
    assert rep.annulus_conditions.all_hold


def test_classification_rejects_invalid_point():
    with pytest.raises(ValueError):
        classify(TORUS_PARAMS.with_unfolding(0.001, 0.002))
