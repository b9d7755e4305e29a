import math

import numpy as np
import pytest

from chaincalc import dynamics as dyn
from chaincalc import form as fm
from chaincalc import registry as reg


def test_registered_flows_validate():
    for name in reg.FLOWS:
        info = reg.flow(name).validate(samples=500)
        assert info["periodicity"] < 1e-12


def test_wrong_lipschitz_constant_is_caught():
    from dataclasses import replace
    with pytest.raises(ValueError):
        replace(reg.flow("cellular"), lipschitz=1.0).validate()


def test_rk4_is_exact_for_linear_flow():
    pts = dyn.integrate(reg.flow("linear"), (0.1, 0.2), 3.0)
    assert np.allclose(pts[-1], [3.1, 0.2 + 3 * math.sqrt(2)], atol=1e-12)
    assert len(pts) == 3001


def test_rk4_fourth_order():
    # x' = sin 2πx from x0 = 0.1: closed form tan(πx) = tan(πx0) e^{2πt}
    flow = reg.flow("sink")
    exact = math.atan(math.tan(0.1 * math.pi) * math.exp(2 * math.pi * 0.5)) / math.pi
    errs = []
    for h in (1e-2, 5e-3):
        from dataclasses import replace
        pts = dyn.integrate(replace(flow, h=h), (0.1, 0.0), 0.5)
        errs.append(abs(pts[-1, 0] - exact))
    assert 12 < errs[0] / errs[1] < 20


def test_integrate_rejects_bad_input():
    with pytest.raises(ValueError):
        dyn.integrate(reg.flow("linear"), (0.1, 0.2), -1.0)
    with pytest.raises(ValueError):
        dyn.integrate(reg.flow("linear"), (0.1, 0.2, 0.3), 1.0)


def test_orbit_chain_of_linear_flow():
    J = dyn.orbit_chain(reg.flow("linear"), (0.3, 0.1), 50.0)
    assert math.isclose(fm.evaluate(reg.form("dx"), J), 1.0, rel_tol=1e-9)
    assert math.isclose(fm.evaluate(reg.form("dy"), J), math.sqrt(2), rel_tol=1e-9)


def test_rational_flow_has_orbit_dependent_averages():
    w = reg.form("cos2pi_x_minus_2y_dx")
    a = fm.evaluate(w, dyn.orbit_chain(reg.flow("rational"), (0.0, 0.0), 20.0))
    b = fm.evaluate(w, dyn.orbit_chain(reg.flow("rational"), (0.25, 0.0), 20.0))
    assert math.isclose(a, 1.0, abs_tol=1e-9) and math.isclose(b, 0.0, abs_tol=1e-9)


def test_time_average_matches_orbit_pairing():
    flow = reg.flow("shear")
    pts = dyn.integrate(flow, (0.1, 0.2), 100.0)
    avg = dyn.time_average(flow, pts)
    J = dyn.orbit_chain_from_points(pts, 100.0)
    assert abs(avg[0] - fm.evaluate(reg.form("dx"), J)) < 1e-4


def test_measure_spec_validation():
    with pytest.raises(ValueError):
        dyn.MeasureSpec.dirac([[0.1, 0.2]], [-1.0])
    mu = dyn.MeasureSpec.lebesgue(8)
    assert math.isclose(mu.total, 1.0) and len(mu.points) == 64


def test_fixed_point_dirac_is_invariant():
    mu = dyn.MeasureSpec.dirac([[0.0, 0.0], [0.5, 0.5]], [1.0, 2.0])
    assert dyn.invariance_residual(reg.flow("sink"), mu) < 1e-12
    assert dyn.invariance_residual(reg.flow("sink"), dyn.MeasureSpec.dirac([[0.1, 0.3]])) > 0.1


def test_wave_fast_path_matches_generic_boundary():
    J = dyn.orbit_chain(reg.flow("shear"), (0.1, 0.2), 5.0)
    tests = dyn.trig_bank(2, 2)
    fast = dyn.boundary_pairings(J, tests)
    from chaincalc.chain import boundary
    slow = np.array([fm.evaluate(fm.scalar_form(f), boundary(J)) for f in tests])
    assert np.allclose(fast, slow, atol=1e-12)


def test_trig_bank_size():
    assert len(dyn.trig_bank(2, 3)) == 48


def test_ergodic_gap_refuses_noninvariant_measure():
    with pytest.raises(ValueError):
        dyn.ergodic_gap(reg.flow("compressible"), (0.1, 0.1), 10.0, dyn.MeasureSpec.lebesgue(16),
                        [reg.form("dx")])


def test_ladder_and_envelope():
    flow = reg.flow("linear")
    lad = dyn.ladder(flow, (0.1, 0.2), [10, 20, 40], [reg.form("dx")])
    assert np.allclose(lad.values[:, 0], 1.0)
    assert lad.slope == pytest.approx(-1.0, abs=0.2)
    E = dyn.cauchy_envelope(np.array([[1.0], [0.5], [0.75]]))
    assert np.allclose(E, [0.5, 0.25, 0.0])
