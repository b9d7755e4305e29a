"""Small worked examples with independently computed oracles."""
import math

import numpy as np
import pytest

from chaincalc import cauchy as cx
from chaincalc import chain as ch
from chaincalc import domains as dom
from chaincalc import dynamics as dyn
from chaincalc import form as fm
from chaincalc import multivector as mv
from chaincalc import norm as nm
from chaincalc import registry as reg
from chaincalc.chain import DiffChain
from chaincalc.fields import AffineMap, ExpWave, FunctionMap, Kink, Polynomial

E = lambda n, *axes: mv.KVector.basis(n, axes)  # noqa: E731


def test_wedge_by_hand():
    e1, e2 = mv.KVector.from_vector([1, 0]), mv.KVector.from_vector([0, 1])
    assert mv.wedge(e1 + e2, e2) == E(2, 0, 1)


def test_contraction_by_hand():
    assert mv.contract([1, 0, 1], E(3, 0, 1) + E(3, 1, 2)).is_zero()


def test_gram_mass():
    a = mv.KVector.simple([1, 1], [0, 1])
    assert math.isclose(mv.mass_simple(a, [[1, 1], [0, 1]]), 1.0)


def test_mass_of_sum_of_orthogonal_planes():
    assert math.isclose(mv.mass_upper(E(4, 0, 1) + E(4, 2, 3)), 2.0)


def test_second_difference_by_hand():
    p, u, a = np.array([0.5, 0.0]), np.array([0.25, 0.5]), E(2, 0)
    D = ch.difference([u, u], DiffChain.point(p, a))
    want = DiffChain.point(p + 2 * u, a) - DiffChain.point(p + u, a) * 2.0 + DiffChain.point(p, a)
    assert D == want


def test_multiplying_a_dipole_by_a_coordinate():
    A = DiffChain.point([0.0, 0.0], E(2, 1), markers=[[1.0, 0.0]])
    assert ch.multiply_function(Polynomial.coordinate(2, 0), A) == DiffChain.point([0.0, 0.0], E(2, 1))


def test_extrusion_by_rotation_field():
    from chaincalc.fields import VectorField
    X = VectorField([Polynomial(2, {(0, 1): -1.0}), Polynomial(2, {(1, 0): 1.0})])
    p = np.array([0.5, 2.0])
    got = ch.extrude(X, DiffChain.point(p, E(2, 0)))
    Xp = mv.KVector.from_vector([-2.0, 0.5])
    assert got == DiffChain.point(p, mv.wedge(Xp, E(2, 0)))


def test_clifford_identity():
    rng = np.random.default_rng(1)
    v = rng.integers(-3, 4, 3).astype(float)
    A = DiffChain.point([0.0, 1.0, 2.0], mv.KVector.from_array(3, 1, rng.integers(-3, 4, 3).astype(float)))
    lhs = ch.retract(v, ch.extrude(v, A)) + ch.extrude(v, ch.retract(v, A))
    assert lhs == A * float(v @ v)


def test_boundary_of_unit_area_term():
    dA = ch.boundary(DiffChain.point([0.0, 0.0], E(2, 0, 1)))
    want = DiffChain.point([0.0, 0.0], E(2, 1), markers=[[1, 0]]) - DiffChain.point([0.0, 0.0], E(2, 0), markers=[[0, 1]])
    assert dA == want


def test_perp_and_boundary_pair_with_gradient_and_rotated_gradient():
    rng = np.random.default_rng(2)
    A = DiffChain(2, 1, rng.uniform(-1, 1, (5, 2)), rng.standard_normal((5, 2)))
    f = Polynomial(2, {(2, 1): 1.0, (0, 3): -0.5, (1, 0): 2.0})
    df = fm.exterior_derivative(fm.scalar_form(f))
    area = fm.FormSpec(2, 2, {(0, 1): f})
    assert math.isclose(fm.evaluate(area, ch.perp(ch.boundary(A))), fm.evaluate(df, A), rel_tol=1e-12)
    assert math.isclose(fm.evaluate(fm.scalar_form(f), ch.boundary(ch.perp(A))),
                        fm.evaluate(fm.hodge_star(df), A), rel_tol=1e-12)


def test_scaling_pushforward():
    got = ch.pushforward(AffineMap(2 * np.eye(2)), DiffChain.point([0.25, 0.5], E(2, 0, 1)))
    assert got == DiffChain.point([0.5, 1.0], E(2, 0, 1) * 4.0)


def test_x_dy_stokes_on_area_term():
    w = fm.FormSpec(2, 1, {(1,): Polynomial.coordinate(2, 0)})
    A = DiffChain.point([0.0, 0.0], E(2, 0, 1))
    assert fm.evaluate(w, ch.boundary(A)) == 1.0 == fm.evaluate(reg.form("dxdy"), A)


def test_pullback_of_rotation_form_along_circle():
    F = FunctionMap(1, 2, lambda t: np.column_stack([np.cos(t[:, 0]), np.sin(t[:, 0])]),
                    lambda t: np.stack([np.column_stack([-np.sin(t[:, 0])]), np.column_stack([np.cos(t[:, 0])])], 1))
    w = fm.pullback(F, reg.form("rot"))
    assert np.allclose(w.coefficient_array(np.array([[0.0], [1.0], [2.5]])), 1.0)


def test_pullback_of_area_by_scaling():
    w = fm.pullback(AffineMap(2 * np.eye(2)), reg.form("dxdy"))
    assert np.allclose(w.coefficient_array([[0.3, 0.4]]), 4.0)


def test_sine_one_form_norm():
    w = fm.FormSpec(1, 1, {(0,): ExpWave.sin([1.0])})
    est = fm.form_norm_estimate(w, 1, fm.Region([0.0], [2 * math.pi]), samples=100_000)
    assert abs(est - 1.0) <= 1e-3


def test_kink_lipschitz_constant():
    w = fm.FormSpec(1, 1, {(0,): Kink([1.0])})
    est = fm.form_norm_estimate(w, 1, fm.Region([-1.0], [1.0]), samples=20_000)
    assert abs(est - 1.0) <= 0.05


def test_unit_cube_chain_costs_one():
    for k in (0, 3, 6):
        A = dom.cube_chain(level=k, dim=2)
        assert math.isclose(nm.certify_trivial(A).cost, 1.0)
        b = nm.bracket(A, 1, [reg.form("dxdy")])
        assert math.isclose(b.upper, 1.0) and math.isclose(b.lower, 1.0)


def test_square_boundary_has_positive_lower_bound():
    J = dom.polygon_chain(dom.square_vertices(), 16)
    probe = fm.FormSpec(2, 1, dict(reg.form("rot").coefficients), declared_norm_bounds={1: 1.0})
    assert nm.lower_bound_dual(J, 1, [probe]) == pytest.approx(2.0)


def test_triangle_mesh_boundary_cancels():
    rng = np.random.default_rng(3)
    V = rng.uniform(0, 1, (6, 2))
    mesh = dom.PolyhedralChain(2, 2, np.ones(4), V[[[0, 1, 2], [1, 2, 3], [2, 3, 4], [3, 4, 5]]])
    assert dom.polyhedral_boundary(dom.polyhedral_boundary(mesh)).is_zero()


@pytest.mark.parametrize("L", range(6))
def test_koch_winding_about_centroid(L):
    K = dom.koch_boundary(L)
    J = K.chain(n_per_edge=max(1, 4096 // len(K.vertices)))
    assert abs(cx.winding(J, K.centroid) - 1) < 1e-4
    assert math.isclose(cx.winding_polygon(K.vertices, K.centroid), 1.0)


def test_cone_from_outside_point_has_unit_signed_area():
    C = dom.cone_at([3.0, 1.0], dom.PolyhedralChain.polygon(dom.square_vertices()))
    assert math.isclose(float(np.dot(C.weights, dom.simplex_vectors(C.vertices)[:, 0])), 1.0)


def test_square_winding_at_centre():
    J = dom.polygon_chain(dom.square_vertices(), 1 << 10)
    assert abs(cx.winding(J, 0.0) - 1) < 1e-6


def test_cauchy_formula_on_circle():
    J = dom.circle_chain(N=1 << 12)
    assert abs(cx.cauchy_formula(reg.function("exp"), J, 0.0) - 1) < 1e-6
    assert abs(cx.cauchy_formula(reg.function("z2"), J, 0.3) - 0.09) < 1e-6


def test_residue_on_square():
    J = dom.polygon_chain(dom.square_vertices(), 1 << 12)
    f = reg.function("pole03_exp")
    assert abs(cx.complex_pair(f, J) - 2j * math.pi) < 1e-6
    assert abs(cx.residue_sum(f, J) - 2j * math.pi) < 1e-6


def test_double_winding_of_reciprocal():
    J = dom.circle_chain(N=1 << 12, turns=2)
    f = reg.function("recip")
    assert abs(cx.residue_sum(f, J) - 4j * math.pi) < 1e-12
    assert abs(cx.complex_pair(f, J) - 4j * math.pi) / (4 * math.pi) < 1e-6


def test_cone_density_in_square():
    C = dom.cone_at([0.3, -0.1], dom.PolyhedralChain.polygon(dom.square_vertices()))
    d = cx.signed_density(C, [0.1, 0.2], mc_budget=20_000, seed=1)
    assert abs(d.value - 1.0) < 2e-2


def test_closed_approximation_far_winding():
    P = dom.PolyhedralChain.polygon([[0, 0], [1, 0], [1, 1]], closed=False)
    Q = cx.close_approximation(P, [0.5, 0.2], 0.1)
    J = dom.polyhedral_to_pointed(Q, level=8)
    assert abs(cx.winding(J, 10.0 + 10.0j)) < 1e-8


def test_shear_flow_lebesgue_pairing():
    xi = dyn.measure_chain(reg.flow("shear"), dyn.MeasureSpec.lebesgue(64))
    assert abs(fm.evaluate(reg.form("dx"), xi) - 1.0) < 1e-6


def test_linear_flow_ergodic_gap():
    forms = [reg.form(n) for n in ("dx", "dy", "cos2pix_dx")]
    gap = dyn.ergodic_gap(reg.flow("linear"), (0.1, 0.2), 2000.0, dyn.MeasureSpec.lebesgue(64), forms)
    assert gap <= 1e-2


def test_rational_flow_gap_stays_large():
    w = reg.form("cos2pi_x_minus_2y_dx")
    xi = dyn.measure_chain(reg.flow("rational"), dyn.MeasureSpec.lebesgue(64))
    for T in (100.0, 400.0):
        J = dyn.orbit_chain(reg.flow("rational"), (0.0, 0.0), T)
        assert abs(fm.evaluate(w, J) - fm.evaluate(w, xi)) > 0.5
