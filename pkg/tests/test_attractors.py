import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bykov.attractors import (
    CellClass,
    FoldDetected,
    MapFamily,
    Side,
    Stability,
    birkhoff_rotation,
    detect_homoclinic,
    find_crossings,
    find_periodic,
    fixed_point_boundary,
    fixed_point_oracle,
    graph_transform,
    grow_manifold,
    invariance_residual,
    iterate,
    lyapunov_spectrum,
    rotation_number,
    seed_grid,
    strange_attractor_scan,
    tongue_boundary,
    tongue_tip,
)
from bykov.attractors.circle import TrigInterpolant
from bykov.attractors.periodic import classify_multipliers
from bykov.attractors.scan import cell_start
from bykov.maps import ReturnMap
from bykov.model import derive_constants
from bykov.regimes import band_for

from .conftest import K_HORSESHOE, TORUS_PARAMS

K_TORUS = derive_constants(TORUS_PARAMS).K_omega
DELTA_TORUS = derive_constants(TORUS_PARAMS).delta


def test_iterate_stays_in_band(torus_map, backend):
    band = band_for(torus_map)
    rec = iterate(torus_map, (1.0, 0.5 * (band.y_lo + band.y_hi)), 5000, backend=backend)
    assert not rec.escaped and len(rec) == 5000
    assert np.all((rec.ys > band.y_lo) & (rec.ys < band.y_hi))
    assert np.all((rec.xs >= 0) & (rec.xs < 2 * math.pi))


def test_iterate_records_escape(backend):
    m = ReturnMap.from_constants(2.0, 1.0, 0.1, 0.2)
    rec = iterate(m, (1.5 * math.pi, 0.0), 10, backend=backend)
    assert rec.escaped and rec.escape_index == 0


def test_iterate_rejects_empty_run(torus_map):
    with pytest.raises(ValueError):
        iterate(torus_map, (0.0, 0.001), 0)


def test_backends_agree_on_orbits(torus_map):
    from bykov._backend import available
    runs = [iterate(torus_map, (0.3, 0.002), 2000, backend=b) for b in available()]
    for r in runs[1:]:
        np.testing.assert_array_equal(r.xs, runs[0].xs)
        np.testing.assert_array_equal(r.ys, runs[0].ys)


def test_birkhoff_rotation_of_rigid_rotation():
    est = birkhoff_rotation(lambda x: x + 2 * math.pi * 0.3, 0.0, 1000)
    assert est.rho == pytest.approx(0.3, abs=1e-12)
    assert est.converged


def test_birkhoff_rotation_of_standard_family():
    # an independent Arnold circle map: locked at 0 for small drift
    est = birkhoff_rotation(lambda x: x + 0.01 - 0.5 * math.sin(x), 0.1, 20000)
    assert est.rho == pytest.approx(0.0, abs=1e-4)


def test_rotation_without_splitting_matches_closed_form():
    A = 0.01
    m = ReturnMap.from_constants(2.0, 1.0, A, 0.0)
    y_star = (1 - 2 * A - math.sqrt(1 - 4 * A)) / 2
    est = rotation_number(m, y_star, n=100_000)
    assert est.frac == pytest.approx((-math.log(y_star + A) / (2 * math.pi)) % 1, abs=1e-9)


def test_rotation_raises_on_escape():
    m = ReturnMap.from_constants(2.0, 1.0, 0.1, 0.2)
    with pytest.raises(ArithmeticError):
        rotation_number(m, 0.0, n=100)


def test_lyapunov_sum_is_mean_log_det(torus_map, backend):
    est = lyapunov_spectrum(torus_map, (0.5, 0.002), 20_000, backend=backend)
    assert est.lam_sum == pytest.approx(est.mean_log_det, rel=1e-8)
    assert est.lam_min <= est.lam_max


def test_lyapunov_on_horseshoe_attractor(horseshoe_map):
    est = lyapunov_spectrum(horseshoe_map, (3.6, 1e-5), 50_000)
    if not est.escaped:
        assert est.lam_sum < 0


def test_lyapunov_escape_gives_nan():
    m = ReturnMap.from_constants(2.0, 1.0, 0.1, 0.2)
    est = lyapunov_spectrum(m, (1.5 * math.pi, 0.0), 1000)
    assert est.escaped and math.isnan(est.lam_max)


def test_lyapunov_needs_long_runs(torus_map):
    with pytest.raises(ValueError):
        lyapunov_spectrum(torus_map, (0.0, 0.002), 999)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=8, max_size=8))
def test_trig_interpolant_hits_nodes(vals):
    v = np.array(vals)
    t = TrigInterpolant(v)
    nodes = 2 * math.pi * np.arange(8) / 8
    np.testing.assert_allclose(t(nodes), v, atol=1e-12)


def test_trig_interpolant_derivative():
    n = 32
    x = 2 * math.pi * np.arange(n) / n
    t = TrigInterpolant(np.sin(3 * x))
    xs = np.linspace(0, 6, 17)
    val, der = t(xs, derivative=True)
    np.testing.assert_allclose(val, np.sin(3 * xs), atol=1e-12)
    np.testing.assert_allclose(der, 3 * np.cos(3 * xs), atol=1e-11)


def test_graph_transform_torus(torus_map):
    band = band_for(torus_map)
    g = graph_transform(torus_map, band, N=256)
    assert g.within(band)
    assert invariance_residual(torus_map, g.heights) < 5e-12


def test_graph_transform_flat_case():
    A = 0.01
    m = ReturnMap.from_constants(2.0, 1.0, A, 0.0)
    g = graph_transform(m, band_for(m), N=64)
    y_star = (1 - 2 * A - math.sqrt(1 - 4 * A)) / 2
    np.testing.assert_allclose(g.heights, y_star, atol=1e-13)


def test_graph_transform_detects_fold(horseshoe_map):
    with pytest.raises(FoldDetected):
        graph_transform(horseshoe_map, band_for(horseshoe_map), N=256)


@pytest.mark.parametrize("N", [100, 4])
def test_graph_transform_grid_size(torus_map, N):
    with pytest.raises(ValueError):
        graph_transform(torus_map, band_for(torus_map), N=N)


def test_classify_multipliers():
    assert classify_multipliers([0.5, 0.2]) is Stability.SINK
    assert classify_multipliers([2.0, 0.2]) is Stability.SADDLE
    assert classify_multipliers([2.0, 3.0]) is Stability.SOURCE
    assert classify_multipliers([1.0, 0.2]) is Stability.NON_HYPERBOLIC


@pytest.mark.parametrize("A,a", [(0.0105, 0.1), (0.01, 0.2), (0.012, 0.3)])
def test_fixed_points_match_closed_form(A, a):
    m = ReturnMap.from_constants(2.0, K_HORSESHOE, A, a * A)
    found = find_periodic(m, 1, winding=13)
    exact = fixed_point_oracle(2.0, K_HORSESHOE, A, a * A, 13)
    assert len(found) == len(exact) == 2
    for x, y in exact:
        assert any(abs(math.remainder(o.x - x, 2 * math.pi)) < 1e-9 and abs(o.y - y) < 1e-12
                   for o in found)
    kinds = sorted(o.stability.value for o in found)
    assert "Saddle" in kinds


def test_periodic_multipliers_and_determinant(torus_map):
    A_tip = tongue_tip(DELTA_TORUS, K_TORUS, 2)
    m = MapFamily(DELTA_TORUS, K_TORUS).at(A_tip, 0.2)
    orbits = find_periodic(m, 1, winding=2)
    assert {o.stability for o in orbits} == {Stability.SADDLE, Stability.SINK}
    for o in orbits:
        prod = o.multipliers[0] * o.multipliers[1]
        assert abs(prod - o.det_product) < 1e-10 * abs(o.det_product)


def test_period_two_orbits_are_primitive(horseshoe_map):
    orbits = find_periodic(horseshoe_map, 2, seeds=seed_grid(horseshoe_map, 32, 6))
    assert orbits
    for o in orbits:
        assert o.period == 2
        p, q = o.points
        assert math.hypot(math.remainder(p.x - q.x, 2 * math.pi), p.y - q.y) > 1e-8


def test_tongue_tip_and_boundary():
    U = math.exp(-2 * math.pi * 13 / K_HORSESHOE)
    assert tongue_tip(2.0, K_HORSESHOE, 13) == pytest.approx(U - U * U)
    assert float(fixed_point_boundary(2.0, K_HORSESHOE, tongue_tip(2.0, K_HORSESHOE, 13), 13)) < 1e-14


def test_tongue_bisection_matches_exact_boundary():
    fam = MapFamily(2.0, K_HORSESHOE)
    A_values = [0.006, 0.01, 0.012]
    tb = tongue_boundary(fam, 1, 14, (0.0, 0.6), A_values, seeds_xy=(16, 4))
    exact = fixed_point_boundary(2.0, K_HORSESHOE, np.array(A_values), 14)
    for col, e in zip(tb.columns, exact):
        assert col.status == "boundary"
        assert col.a_boundary == pytest.approx(e, abs=2e-6)


def test_tongue_rejects_bad_range():
    with pytest.raises(ValueError):
        tongue_boundary(MapFamily(2.0, 1.0), 1, 1, (0.5, 0.2), [0.01])


def test_unstable_manifold_reaches_sink():
    A_tip = tongue_tip(DELTA_TORUS, K_TORUS, 2)
    m = MapFamily(DELTA_TORUS, K_TORUS).at(A_tip, 0.2)
    orbits = find_periodic(m, 1, winding=2)
    saddle = next(o for o in orbits if o.stability is Stability.SADDLE)
    sink = next(o for o in orbits if o.stability is Stability.SINK)
    wu = grow_manifold(m, saddle, Side.UNSTABLE, max_arclength=20)
    for x, y in wu.terminal_points():
        assert abs(math.remainder(x - sink.x, 2 * math.pi)) < 1e-6
        assert abs(y - sink.y) < 1e-8


def test_manifold_needs_saddle():
    A_tip = tongue_tip(DELTA_TORUS, K_TORUS, 2)
    m = MapFamily(DELTA_TORUS, K_TORUS).at(A_tip, 0.2)
    sink = next(o for o in find_periodic(m, 1, winding=2) if o.stability is Stability.SINK)
    with pytest.raises(ValueError):
        grow_manifold(m, sink, Side.STABLE)


def test_torus_side_saddle_has_no_homoclinic_crossings():
    A_tip = tongue_tip(DELTA_TORUS, K_TORUS, 2)
    m = MapFamily(DELTA_TORUS, K_TORUS).at(A_tip, 0.2)
    saddle = next(o for o in find_periodic(m, 1, winding=2) if o.stability is Stability.SADDLE)
    rep = detect_homoclinic(m, saddle, max_arclength=10)
    assert rep.n_crossings == 0


def test_crossings_need_opposite_sides():
    A_tip = tongue_tip(DELTA_TORUS, K_TORUS, 2)
    m = MapFamily(DELTA_TORUS, K_TORUS).at(A_tip, 0.2)
    saddle = next(o for o in find_periodic(m, 1, winding=2) if o.stability is Stability.SADDLE)
    wu = grow_manifold(m, saddle, Side.UNSTABLE, max_arclength=2)
    with pytest.raises(ValueError):
        find_crossings(wu, wu)


def test_cell_start_streams_are_independent_of_order():
    a = cell_start(7, 3, 4, 0.0, 1.0)
    cell_start(7, 0, 0, 0.0, 1.0)
    assert cell_start(7, 3, 4, 0.0, 1.0) == a
    assert cell_start(7, 3, 5, 0.0, 1.0) != a


def test_small_scan_is_deterministic():
    fam = MapFamily(2.0, K_HORSESHOE)
    kw = dict(n=5000, transient=500, seed=11, workers=1)
    t1 = strange_attractor_scan(fam, [0.005, 0.02], [0.1, 0.55], **kw)
    t2 = strange_attractor_scan(fam, [0.005, 0.02], [0.1, 0.55], **kw)
    np.testing.assert_array_equal(t1.lam_max, t2.lam_max)
    assert t1.shape == (2, 2)
    assert all(isinstance(c, CellClass) for row in t1.cls for c in row)
    assert {r for row in t1.regime for r in row} == {"Transition"}
