import math

import numpy as np
from hypothesis import given, strategies as st

from helpers import random_polynomial

from chaincalc.fields import (AffineComposition, AffineMap, Constant, ExpWave, FieldMap, Kink,
                              fd_derivative, pushforward_field, VectorField)

seeds = st.integers(0, 2 ** 31 - 1)


def test_polynomial_derivatives():
    p = random_polynomial(np.random.default_rng(0), 2)
    x = np.array([[0.3, -0.7]])
    d = np.array([[[1.0, 0.0]]])
    fd = fd_derivative(p.value, x, d, 1e-3)
    assert np.allclose(p.derivative(x, d), fd, atol=1e-8)


def test_expwave_cos_and_sin():
    c, s = ExpWave.cos([2.0, 0.0]), ExpWave.sin([2.0, 0.0])
    x = np.array([[0.4, 1.0]])
    assert math.isclose(c.value(x)[0], math.cos(0.8))
    assert math.isclose(s.value(x)[0], math.sin(0.8))
    assert math.isclose(s.derivative(x, [[1.0, 0.0]])[0], 2 * math.cos(0.8))
    assert c.bounded and not ExpWave(2, 1.0, [1.0, 0.0]).bounded


def test_kink_value_and_slope():
    k = Kink([1.0, 0.0], 0.5)
    x = np.array([[0.2, 0.0], [0.9, 3.0]])
    assert np.allclose(k.value(x), [0.3, 0.4])
    assert np.allclose(k.derivative(x, [[1.0, 0.0]]), [-1.0, 1.0])


@given(seeds)
def test_field_algebra_agrees_pointwise(seed):
    rng = np.random.default_rng(seed)
    f, g = random_polynomial(rng, 2), random_polynomial(rng, 2)
    x = rng.uniform(-1, 1, (5, 2))
    assert np.allclose((f + g).value(x), f.value(x) + g.value(x))
    assert np.allclose((f * g).value(x), f.value(x) * g.value(x))
    assert np.allclose((f - 2.0).value(x), f.value(x) - 2.0)


@given(seeds)
def test_product_rule(seed):
    rng = np.random.default_rng(seed)
    f, g = random_polynomial(rng, 2), random_polynomial(rng, 2)
    x = rng.uniform(-1, 1, (4, 2))
    v = rng.standard_normal(2)
    lhs = (f * g).derivative(x, [v])
    rhs = f.derivative(x, [v]) * g.value(x) + f.value(x) * g.derivative(x, [v])
    assert np.allclose(lhs, rhs)


def test_affine_composition():
    f = random_polynomial(np.random.default_rng(2), 2)
    A, b = np.array([[1.0, 2.0], [0.0, 1.0]]), np.array([0.1, 0.2])
    h = AffineComposition(f, A, b)
    x = np.array([[0.3, 0.4]])
    assert np.allclose(h.value(x), f.value(x @ A.T + b))


def test_field_map_jacobian():
    F = FieldMap([random_polynomial(np.random.default_rng(s), 2) for s in (1, 2)])
    x = np.array([[0.2, 0.5]])
    J = F.jacobian(x)[0]
    for j in range(2):
        e = np.eye(2)[j]
        fd = (F.value(x + 1e-6 * e) - F.value(x - 1e-6 * e))[0] / 2e-6
        assert np.allclose(J[:, j], fd, atol=1e-6)


def test_pushforward_of_constant_field():
    F = AffineMap([[2.0, 0.0], [1.0, 1.0]])
    X = pushforward_field(F, VectorField.constant([1.0, 0.0]))
    assert np.allclose(X.value([[0.3, 0.3]]), [[2.0, 1.0]])


def test_constant_field_has_zero_derivatives():
    c = Constant(3, 2.5)
    assert np.allclose(c.derivative(np.zeros((2, 3)), [[1.0, 0.0, 0.0]]), 0.0)
