import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chaincalc import chain as ch
from chaincalc import domains as dom
from chaincalc import form as fm
from chaincalc import registry as reg

seeds = st.integers(0, 2 ** 31 - 1)


def test_cube_chain_volume_and_size():
    A = dom.cube_chain(level=3, dim=2)
    assert len(A) == 64
    assert math.isclose(float(A.coeffs.sum()), 1.0)


def test_cube_difference_matches_subtraction():
    for n in (1, 2, 3):
        assert dom.cube_difference(dim=n, level=2) == dom.cube_chain(dim=n, level=2) - dom.cube_chain(dim=n, level=1)


def test_cube_approximant_tail():
    ap = dom.cube_approximant(dim=2)
    assert math.isclose(ap.tail_bound(3), math.sqrt(2) * 2.0 ** -4, rel_tol=1e-12)
    assert ap.certify(2).cost <= dom.cube_error_bound(2, 2)


def test_riemann_sums_converge_on_cube():
    # midpoint rule on [0,1]^2 for x^2 y: exact 1/6; error ratio ~1/4 per level
    w = fm.FormSpec(2, 2, {(0, 1): reg._poly({(2, 1): 1.0})})
    errs = [abs(fm.evaluate(w, dom.cube_chain(level=L, dim=2)) - 1 / 6) for L in (3, 4, 5)]
    assert errs[1] / errs[0] == pytest.approx(0.25, rel=0.05)


def test_whitney_disk_area():
    A = dom.whitney_chain(dom.disk(), 8)
    assert abs(float(A.coeffs.sum()) - math.pi) / math.pi < 0.01


def test_whitney_cubes_lie_inside():
    for lo, L in dom.whitney_cubes(dom.disk(), 6):
        far = np.linalg.norm(np.maximum(np.abs(lo), np.abs(lo + 2.0 ** -L)), axis=1)
        assert np.all(far <= 1.0 + 1e-12)


def test_whitney_annulus_and_box():
    A = dom.whitney_chain(dom.annulus(), 9)
    assert abs(float(A.coeffs.sum()) - 0.75 * math.pi) / (0.75 * math.pi) < 0.01
    B = dom.whitney_chain(dom.box_set([0, 0], [0.75, 0.75]), 6)
    assert math.isclose(float(B.coeffs.sum()), 0.5625)


def test_simplex_chain_mass_is_exact():
    for L in range(4):
        A = dom.simplex_chain([[0, 0], [1, 0], [0, 1]], L)
        assert math.isclose(float(A.coeffs.sum()), 0.5)
        assert len(A) == 4 ** L


def test_polyhedral_boundary_squared_zero():
    T = dom.PolyhedralChain.simplex([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert dom.polyhedral_boundary(dom.polyhedral_boundary(T)).is_zero()


def test_polyhedral_canonical_form():
    a = dom.PolyhedralChain.simplex([[0, 0], [1, 0], [0, 1]])
    b = dom.PolyhedralChain.simplex([[1, 0], [0, 0], [0, 1]])
    assert (a + b).is_zero()
    assert (a + a) == a * 2.0
    assert dom.PolyhedralChain.from_json(a.to_json()) == a


@given(seeds)
def test_cone_boundary_is_polygon(seed):
    rng = np.random.default_rng(seed)
    V = rng.uniform(-1, 1, (5, 2))
    P = dom.PolyhedralChain.polygon(V)
    z = rng.uniform(-2, 2, 2)
    try:
        C = dom.cone_at(z, P)
    except ValueError:
        return
    assert dom.polyhedral_boundary(C) == P


def test_cone_requires_closed_polygon():
    P = dom.PolyhedralChain.polygon([[0, 0], [1, 0], [1, 1]], closed=False)
    with pytest.raises(ValueError):
        dom.cone_at([5, 5], P)


def test_polyline_chain_pairs_exactly_with_constant_forms():
    J = dom.polygon_chain(dom.square_vertices(), 7)
    assert abs(fm.evaluate(reg.form("dx"), J)) < 1e-15
    assert math.isclose(fm.evaluate(reg.form("rot"), J), 2.0, rel_tol=1e-12)  # ∮ x dy − y dx = 2·area


def test_circle_chain_length():
    N = 1 << 10
    J = dom.circle_chain(N=N)
    length = float(np.linalg.norm(J.coeffs, axis=1).sum())
    assert math.isclose(length, N * 2 * math.sin(math.pi / N), rel_tol=1e-13)
    assert abs(length - 2 * math.pi) / (2 * math.pi) < 1e-5 or N < 2048
    J2 = dom.circle_chain(N=2048)
    assert abs(float(np.linalg.norm(J2.coeffs, axis=1).sum()) - 2 * math.pi) / (2 * math.pi) < 1e-5


def test_koch_curve():
    K1 = dom.koch_boundary(1)
    assert len(K1.vertices) == 12 and math.isclose(K1.length, 4.0)
    K3 = dom.koch_boundary(3)
    assert math.isclose(K3.length, 3 * (4 / 3) ** 3)
    assert math.isclose(fm.evaluate(reg.form("rot"), K3.chain()) / 2, polygon_area(K3.vertices))


def polygon_area(V):
    x, y = V[:, 0], V[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def test_koch_area_limit():
    # level-L snowflake on a unit triangle: A_0 (8/5 − (3/5)(4/9)^L), A_0 = √3/4
    for L in (0, 2, 6):
        exact = math.sqrt(3) / 4 * (1.6 - 0.6 * (4 / 9) ** L)
        assert math.isclose(polygon_area(dom.koch_boundary(L).vertices), exact, rel_tol=1e-10)


def test_polyhedral_to_pointed():
    P = dom.PolyhedralChain.simplex([[0, 0], [2, 0], [0, 2]])
    A = dom.polyhedral_to_pointed(P, 2)
    assert math.isclose(float(A.coeffs.sum()), 2.0)


def test_boundary_of_pointed_cube_pairs_like_polygon():
    # Stokes at the level of chains: ∂ of the cube chain pairs with a 1-form like d of that form
    w = reg.form("poly_dx")
    A = dom.cube_chain(level=3, dim=2)
    assert math.isclose(fm.evaluate(w, ch.boundary(A)), fm.evaluate(fm.exterior_derivative(w), A), rel_tol=1e-12)


def test_whitney_mass_monotone_and_bounded():
    m = [ch.mass_upper(dom.whitney_chain(dom.disk(), L)) for L in range(2, 10)]
    assert all(b >= a for a, b in zip(m, m[1:]))
    assert m[-1] <= 4.0


def test_circle_rotation_form():
    # chords of the circle pair with −y dx + x dy to N sin(2π/N); within 1e−5 of 2π from N = 2^11
    for N in (1 << 10, 1 << 11):
        v = fm.evaluate(reg.form("rot"), dom.circle_chain(N=N))
        assert math.isclose(v, N * math.sin(2 * math.pi / N), rel_tol=1e-12)
    assert abs(v - 2 * math.pi) < 1e-5
