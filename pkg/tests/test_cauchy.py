import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chaincalc import cauchy as cx
from chaincalc import domains as dom
from chaincalc import registry as reg
from chaincalc.chain import DiffChain

seeds = st.integers(0, 2 ** 31 - 1)
SQUARE = dom.polygon_chain(dom.square_vertices(), 1 << 10)


def test_holomorphic_spec_derivatives():
    f = reg.function("exp")
    z = np.array([0.3 + 0.2j])
    assert np.allclose(f.derivative(z, 2), np.exp(z))
    g = cx.HolomorphicSpec(lambda z: z ** 3)
    assert np.allclose(g.derivative(z, 1), 3 * z ** 2, atol=1e-8)
    assert np.allclose(g.derivative(z, 2), 6 * z, atol=1e-6)


def test_cauchy_riemann_check_rejects_conjugation():
    with pytest.raises(ValueError):
        reg.function("conj").validate(np.array([0.1 + 0.1j, 0.3 - 0.2j]))
    assert reg.function("exp").validate(np.array([0.1 + 0.1j])) < 1e-6


def test_integral_of_conj_is_twice_area_times_i():
    assert abs(cx.complex_pair(reg.function("conj"), SQUARE) - 2j) < 1e-12


def test_integral_of_entire_function_vanishes():
    for name in ("exp", "z2", "one"):
        assert abs(cx.complex_pair(reg.function(name), SQUARE)) < 1e-6


def test_marker_terms_pair_with_derivatives():
    # (p; 1; e_1) pairs with f'(p)·1
    A = DiffChain(2, 1, [[0.2, 0.1]], [[1.0, 0.0]], [1], [[[1.0, 0.0]]])
    f = reg.function("exp")
    assert np.isclose(cx.complex_pair(f, A), np.exp(0.2 + 0.1j))


def test_pole_on_chain_rejected():
    with pytest.raises(ValueError):
        cx.complex_pair(reg.function("recip"), dom.polygon_chain(dom.square_vertices(side=0.05), 4))


def test_winding_polygon_oracle():
    V = dom.square_vertices()
    assert math.isclose(cx.winding_polygon(V, [0.1, 0.2]), 1.0)
    assert abs(cx.winding_polygon(V, [3.0, 0.0])) < 1e-15
    assert math.isclose(cx.winding_polygon(V[::-1], [0.0, 0.0]), -1.0)


@settings(max_examples=25)
@given(seeds)
def test_winding_matches_polygon_oracle(seed):
    rng = np.random.default_rng(seed)
    z = rng.uniform(-1, 1, 2)
    if np.min(np.abs(np.abs(z) - 0.5)) < 0.05:
        return
    assert abs(cx.winding(SQUARE, z) - cx.winding_polygon(dom.square_vertices(), z)) < 1e-5


def test_winding_rejects_points_too_close():
    with pytest.raises(ValueError):
        cx.winding(SQUARE, [0.5, 0.0])


def test_cauchy_formula():
    f = reg.function("exp")
    z = 0.1 - 0.2j
    assert abs(cx.cauchy_formula(f, dom.polygon_chain(dom.square_vertices(), 1 << 12), z) - np.exp(z)) < 1e-6


def test_residue_sum_two_poles():
    f = reg.function("two_poles")
    J = dom.circle_chain(N=1 << 11)
    r = cx.residue_sum(f, J, detailed=True)
    assert r.indices == (1, 1)
    assert abs(r.value - 2j * math.pi * (1 - 2)) < 1e-10
    J2 = dom.circle_chain(center=(0.5, 0.0), radius=0.25, N=256)
    assert abs(cx.residue_sum(f, J2) - 2j * math.pi) < 1e-10


def test_residue_sum_rejects_pole_near_chain():
    with pytest.raises(ValueError):
        cx.residue_sum(reg.function("pole03_exp"), dom.circle_chain(radius=0.32, N=256))


def test_triangle_disk_area_limits():
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    assert math.isclose(cx.triangle_disk_area(tri, np.array([0.2, 0.2]), 1e-2), math.pi * 1e-4)
    assert math.isclose(cx.triangle_disk_area(tri, np.array([0.2, 0.2]), 10.0), 0.5)
    assert math.isclose(cx.triangle_disk_area(tri, np.array([0.0, 0.0]), 1e-2), math.pi * 1e-4 / 4)


def test_exact_density_of_triangle():
    T = dom.PolyhedralChain.simplex([[0, 0], [1, 0], [0, 1]])
    assert abs(cx.signed_density(T, [0.2, 0.2]).value - 1.0) < 1e-12
    assert abs(cx.signed_density(T, [2.0, 2.0]).value) < 1e-12
    with pytest.warns(RuntimeWarning):
        assert abs(cx.signed_density(T, [0.5, 0.0], eps=[1e-3, 5e-4]).value - 0.5) < 1e-3


def test_cone_density_is_winding():
    V = np.array([[0, 0], [2, 0], [2, 2], [1, 0.5], [0, 2]], dtype=float)
    C = dom.cone_at([3.0, 3.0], dom.PolyhedralChain.polygon(V))
    for z in ([0.5, 0.3], [1.0, 1.5], [1.9, 1.2], [-1.0, 0.0]):
        assert abs(cx.signed_density(C, z).value - cx.winding_polygon(V, z)) < 1e-9


def test_close_approximation_is_closed():
    P = dom.PolyhedralChain.polygon([[0, 0], [1, 0], [1, 1]], closed=False)
    Q = cx.close_approximation(P, [0.5, 0.2], 0.1)
    assert dom.polyhedral_boundary(Q).is_zero()
