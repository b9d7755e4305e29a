import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import random_chain

from chaincalc import chain as ch
from chaincalc import multivector as mv
from chaincalc.chain import ChainTerm, DiffChain

seeds = st.integers(0, 2 ** 31 - 1)


def shape(seed, kmin=0):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(max(1, kmin), 5))
    return rng, n, int(rng.integers(kmin, n + 1))


def test_point_chain_and_terms():
    A = DiffChain.point([0.5, 0.25], mv.KVector.basis(2, (0,)), markers=[[0, 1]])
    (t,) = A.terms()
    assert t.point == (0.5, 0.25)
    assert A.max_depth == 1 and not A.marker_free


def test_exact_cancellation():
    A = DiffChain.point([0.1, 0.2], mv.KVector.basis(2, (0,)))
    assert (A - A).is_zero()
    assert len(A + A) == 1


def test_markers_are_order_free():
    a = mv.KVector.scalar(2)
    A = DiffChain.point([0, 0], a, markers=[[1, 0], [0, 1]])
    B = DiffChain.point([0, 0], a, markers=[[0, 1], [1, 0]])
    assert A == B


def test_difference_chain_of_order_two():
    base = DiffChain.point([0.0], 1.0)
    D = ch.difference([[1.0], [2.0]], base)
    pts = sorted((t.point[0], t.alpha.to_array()[0]) for t in D.terms())
    assert pts == [(0.0, 1.0), (1.0, -1.0), (2.0, -1.0), (3.0, 1.0)]


def test_boundary_of_unit_dipole():
    A = DiffChain.point([0.0, 0.0], mv.KVector.basis(2, (0,)))
    dA = ch.boundary(A)
    assert dA.grade == 0 and dA.max_depth == 1
    (t,) = dA.terms()
    assert np.allclose(t.markers, [[1.0, 0.0]])


def test_grade_checks():
    A = DiffChain.point([0.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        ch.boundary(A)
    with pytest.raises(ValueError):
        ch.retract([1, 0], A)
    B = DiffChain.point([0.0, 0.0], mv.KVector.basis(2, (0, 1)))
    with pytest.raises(ValueError):
        ch.extrude([1, 0], B)


def test_mixed_dimension_rejected():
    with pytest.raises(ValueError):
        DiffChain.point([0.0], 1.0) + DiffChain.point([0.0, 0.0], 1.0)


def test_pushforward_rejects_markers():
    from chaincalc.fields import AffineMap
    A = DiffChain.point([0.0, 0.0], 1.0, markers=[[1, 0]])
    with pytest.raises(ValueError):
        ch.pushforward(AffineMap.identity(2), A)


@given(seeds)
def test_boundary_squared_is_zero(seed):
    rng, n, k = shape(seed, kmin=2)
    if k < 2:
        return
    assert ch.boundary(ch.boundary(random_chain(rng, n, k))).is_zero()


@given(seeds)
def test_perp_squared(seed):
    rng, n, k = shape(seed)
    A = random_chain(rng, n, k)
    assert ch.perp(ch.perp(A)) == A * (-1) ** (k * (n - k))


@given(seeds)
def test_addition_commutes_and_cancels(seed):
    rng, n, k = shape(seed)
    A, B = random_chain(rng, n, k), random_chain(rng, n, k)
    assert A + B == B + A
    assert (A + B - B) == A


@given(seeds)
def test_boundary_is_linear(seed):
    rng, n, k = shape(seed, kmin=1)
    if k < 1:
        return
    A, B = random_chain(rng, n, k), random_chain(rng, n, k)
    assert ch.boundary(A + B * 2.0) == ch.boundary(A) + ch.boundary(B) * 2.0


@given(seeds)
def test_prederivatives_commute(seed):
    rng, n, k = shape(seed)
    A = random_chain(rng, n, k)
    u, v = rng.integers(-2, 3, n).astype(float), rng.integers(-2, 3, n).astype(float)
    assert ch.prederivative(u, ch.prederivative(v, A)) == ch.prederivative(v, ch.prederivative(u, A))


@given(seeds)
def test_boundary_commutes_with_prederivative(seed):
    rng, n, k = shape(seed, kmin=1)
    if k < 1:
        return
    A = random_chain(rng, n, k)
    v = rng.integers(-2, 3, n).astype(float)
    assert ch.boundary(ch.prederivative(v, A)) == ch.prederivative(v, ch.boundary(A))


@given(seeds)
def test_json_roundtrip(seed):
    rng, n, k = shape(seed)
    A = random_chain(rng, n, k)
    assert DiffChain.from_json(A.to_json()) == A


@given(seeds)
def test_extrude_twice_vanishes(seed):
    rng, n, k = shape(seed)
    if k + 2 > n:
        return
    A = random_chain(rng, n, k)
    v = rng.integers(-2, 3, n).astype(float)
    assert ch.extrude(v, ch.extrude(v, A)).allclose(DiffChain(n, k + 2))


def test_from_terms_matches_array_constructor():
    a = mv.KVector.basis(2, (1,), 2.0)
    A = DiffChain.from_terms([ChainTerm((0.0, 1.0), a, ())])
    assert A == DiffChain(2, 1, [[0.0, 1.0]], [[0.0, 2.0]])


def test_box_pairs_with_laplacian():
    from chaincalc import form as fm
    from chaincalc.fields import Polynomial
    w = fm.FormSpec(2, 1, {(0,): Polynomial(2, {(3, 1): 1.0, (0, 2): 0.5}),
                           (1,): Polynomial(2, {(2, 2): -1.0})})
    A = random_chain(np.random.default_rng(3), 2, 1, J=1, integer=False)
    assert np.isclose(fm.evaluate(w, ch.box(A)), fm.evaluate(fm.laplacian(w), A), atol=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_box_on_point_is_signed_laplacian(n):
    # (p;1) under box pairs with f to (−1)^{n−1} Δf(p); oracle is a central-difference Laplacian
    from chaincalc import form as fm
    from chaincalc.fields import ExpWave, ProductField
    f = ProductField(ExpWave(n, 1.0, [0.7] + [0.0] * (n - 1)), ExpWave.cos([0.0] + [1.3] * (n - 1)))
    p = np.full(n, 0.2)
    h = 1e-3
    lap = sum((f.value([p + h * e]) - 2 * f.value([p]) + f.value([p - h * e]))[0] / h ** 2 for e in np.eye(n))
    got = fm.evaluate(fm.scalar_form(f), ch.box(DiffChain.point(p, 1.0)))
    assert math.isclose(got, (-1) ** (n - 1) * lap, rel_tol=1e-5)
