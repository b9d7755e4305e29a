"""Scalar fields, vector fields and smooth maps with directional-derivative access.

A scalar field answers ``derivative(x, dirs)``: the mixed directional
derivative D_{v_1} ... D_{v_j} f evaluated at each row of ``x``.  ``x`` has
shape (N, n) and ``dirs`` has shape (N, j, n) (or (j, n), shared by all rows).
``j = 0`` gives plain values.  Fields built from polynomials, complex
exponential waves, sums, products and affine compositions have exact
derivatives of every order; ``max_depth`` caps the rest.
"""
from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np


def _rows(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[None, :] if x.ndim == 1 else x


def _dirs(x: np.ndarray, dirs) -> np.ndarray:
    n_rows, n = x.shape
    if dirs is None:
        return np.zeros((n_rows, 0, n))
    d = np.asarray(dirs, dtype=float)
    if d.ndim == 1:
        d = d[None, :]
    if d.ndim == 2:
        d = np.broadcast_to(d, (n_rows,) + d.shape)
    if d.shape[0] != n_rows or d.shape[2] != n:
        raise ValueError(f"direction array has shape {d.shape}, expected ({n_rows}, j, {n})")
    return d


class DepthError(ValueError):
    """Raised when a field cannot supply derivatives to the requested depth."""


class ScalarField:
    dim: int
    max_depth: int | None = None  # None: exact derivatives of every order

    def derivative(self, x, dirs=None) -> np.ndarray:
        x = _rows(x)
        d = _dirs(x, dirs)
        if self.max_depth is not None and d.shape[1] > self.max_depth:
            raise DepthError(f"{type(self).__name__} supplies derivatives to depth "
                             f"{self.max_depth}, {d.shape[1]} requested")
        return self._derivative(x, d)

    def value(self, x) -> np.ndarray:
        return self.derivative(x, None)

    def __call__(self, x) -> np.ndarray:
        return self.value(x)

    def _derivative(self, x, d):  # pragma: no cover - abstract
        raise NotImplementedError

    # algebra
    def __add__(self, other):
        return SumField([self, as_field(other, self.dim)])

    __radd__ = __add__

    def __sub__(self, other):
        return SumField([self, ScaledField(-1.0, as_field(other, self.dim))])

    def __neg__(self):
        return ScaledField(-1.0, self)

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            return ProductField(self, other)
        return ScaledField(float(other), self)

    __rmul__ = __mul__


def as_field(f, dim: int) -> ScalarField:
    if isinstance(f, ScalarField):
        return f
    if callable(f):
        return CallableField(dim, f)
    return Constant(dim, float(f))


def _depth_min(*depths):
    finite = [d for d in depths if d is not None]
    return min(finite) if finite else None


class Constant(ScalarField):
    def __init__(self, dim: int, c: float):
        self.dim, self.c = dim, float(c)

    def _derivative(self, x, d):
        if d.shape[1]:
            return np.zeros(x.shape[0])
        return np.full(x.shape[0], self.c)


class Polynomial(ScalarField):
    """Sum of c * x^e over exponent tuples e."""

    def __init__(self, dim: int, terms: dict):
        self.dim = dim
        self.terms = {tuple(int(a) for a in e): float(c) for e, c in terms.items() if c != 0}
        for e in self.terms:
            if len(e) != dim:
                raise ValueError("exponent tuple length must equal dimension")
        self._cache: dict = {}

    @classmethod
    def coordinate(cls, dim: int, i: int, c: float = 1.0) -> "Polynomial":
        e = [0] * dim
        e[i] = 1
        return cls(dim, {tuple(e): c})

    def _partial(self, idx: tuple) -> dict:
        if idx not in self._cache:
            out = {}
            for e, c in self.terms.items():
                e = list(e)
                for i in idx:
                    if e[i] == 0:
                        c = 0.0
                        break
                    c *= e[i]
                    e[i] -= 1
                if c:
                    out[tuple(e)] = out.get(tuple(e), 0.0) + c
            self._cache[idx] = out
        return self._cache[idx]

    @staticmethod
    def _eval(terms: dict, x: np.ndarray) -> np.ndarray:
        out = np.zeros(x.shape[0])
        for e, c in terms.items():
            out += c * np.prod(x ** np.asarray(e, dtype=float), axis=1)
        return out

    def _derivative(self, x, d):
        j = d.shape[1]
        if j == 0:
            return self._eval(self.terms, x)
        out = np.zeros(x.shape[0])
        values: dict = {}
        for idx in itertools.product(range(self.dim), repeat=j):
            key = tuple(sorted(idx))
            if key not in values:
                values[key] = self._eval(self._partial(key), x)
            if not values[key].any():
                continue
            w = np.ones(x.shape[0])
            for m, i in enumerate(idx):
                w = w * d[:, m, i]
            out += w * values[key]
        return out


class ExpWave(ScalarField):
    """Re(c · exp(κ·x)) with complex amplitude c and complex wave vector κ.

    Covers sin, cos, exp and their products with linear phases.  Bounded on
    R^n exactly when κ is purely imaginary.
    """

    def __init__(self, dim: int, amplitude: complex, kappa: Sequence[complex]):
        self.dim = dim
        self.amplitude = complex(amplitude)
        self.kappa = np.asarray(kappa, dtype=complex)
        if self.kappa.shape != (dim,):
            raise ValueError("wave vector has wrong dimension")

    @classmethod
    def sin(cls, k, phase: float = 0.0, amp: float = 1.0) -> "ExpWave":
        k = np.asarray(k, dtype=float)
        return cls(len(k), -1j * amp * np.exp(1j * phase), 1j * k)

    @classmethod
    def cos(cls, k, phase: float = 0.0, amp: float = 1.0) -> "ExpWave":
        k = np.asarray(k, dtype=float)
        return cls(len(k), amp * np.exp(1j * phase), 1j * k)

    @property
    def bounded(self) -> bool:
        return bool(np.all(self.kappa.real == 0))

    def cj_bound(self, j: int) -> float:
        """sup |D^j f| over R^n along unit directions (bounded waves only)."""
        if not self.bounded:
            return float("inf")
        return abs(self.amplitude) * float(np.linalg.norm(self.kappa)) ** j

    def _derivative(self, x, d):
        z = self.amplitude * np.exp(x @ self.kappa)
        for m in range(d.shape[1]):
            z = z * (d[:, m, :] @ self.kappa)
        return z.real


class SumField(ScalarField):
    def __init__(self, fields: Sequence[ScalarField]):
        self.fields = list(fields)
        self.dim = self.fields[0].dim
        self.max_depth = _depth_min(*(f.max_depth for f in self.fields))

    def _derivative(self, x, d):
        return sum(f.derivative(x, d) for f in self.fields)


class ScaledField(ScalarField):
    def __init__(self, s: float, f: ScalarField):
        self.s, self.f, self.dim, self.max_depth = float(s), f, f.dim, f.max_depth

    def _derivative(self, x, d):
        return self.s * self.f.derivative(x, d)


class ProductField(ScalarField):
    """f·g, differentiated by the Leibniz rule over subsets of directions."""

    def __init__(self, f: ScalarField, g: ScalarField):
        self.f, self.g, self.dim = f, g, f.dim
        self.max_depth = _depth_min(f.max_depth, g.max_depth)

    def _derivative(self, x, d):
        j = d.shape[1]
        out = np.zeros(x.shape[0])
        for mask in range(1 << j):
            s = [m for m in range(j) if mask >> m & 1]
            rest = [m for m in range(j) if not mask >> m & 1]
            out += self.f.derivative(x, d[:, s, :]) * self.g.derivative(x, d[:, rest, :])
        return out


class DirectionalDerivativeField(ScalarField):
    """D_v f for a constant direction v."""

    def __init__(self, f: ScalarField, v):
        self.f, self.dim = f, f.dim
        self.v = np.asarray(v, dtype=float)
        self.max_depth = None if f.max_depth is None else f.max_depth - 1
        if self.max_depth is not None and self.max_depth < 0:
            raise DepthError("cannot differentiate a depth-0 field")

    def _derivative(self, x, d):
        v = np.broadcast_to(self.v, (x.shape[0], 1, self.dim))
        return self.f.derivative(x, np.concatenate([v, d], axis=1))


class AffineComposition(ScalarField):
    """x ↦ f(A x + b)."""

    def __init__(self, f: ScalarField, A, b=None):
        self.f = f
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.b = np.zeros(self.A.shape[0]) if b is None else np.asarray(b, dtype=float)
        self.dim = self.A.shape[1]
        self.max_depth = f.max_depth

    def _derivative(self, x, d):
        return self.f.derivative(x @ self.A.T + self.b, d @ self.A.T)


class Kink(ScalarField):
    """|a·x − c|: Lipschitz with constant ‖a‖, one derivative almost everywhere."""

    max_depth = 1

    def __init__(self, a, c: float = 0.0):
        self.a = np.asarray(a, dtype=float)
        self.c = float(c)
        self.dim = len(self.a)

    def _derivative(self, x, d):
        s = x @ self.a - self.c
        if d.shape[1] == 0:
            return np.abs(s)
        return np.sign(s) * (d[:, 0, :] @ self.a)


class CallableField(ScalarField):
    """Wraps a vectorised function; derivatives only if ``deriv`` is supplied."""

    def __init__(self, dim: int, fn: Callable, deriv: Callable | None = None,
                 depth: int = 0):
        self.dim, self.fn, self.deriv = dim, fn, deriv
        self.max_depth = depth if deriv is not None else 0

    def _derivative(self, x, d):
        if d.shape[1] == 0:
            return np.asarray(self.fn(x), dtype=float)
        return np.asarray(self.deriv(x, d), dtype=float)


def fd_derivative(fn: Callable, x: np.ndarray, d: np.ndarray, h: float = 1e-4,
                  richardson: bool = True) -> np.ndarray:
    """Nested central differences of ``fn`` along the rows of ``d``.

    Error O(h^2), or O(h^4) with one Richardson level (4 D(h) − D(2h)) / 3.
    """
    x = _rows(x)
    d = _dirs(x, d)
    j = d.shape[1]
    if j == 0:
        return np.asarray(fn(x), dtype=float)

    def central(step):
        out = np.zeros(x.shape[0])
        for signs in itertools.product((1.0, -1.0), repeat=j):
            shift = np.einsum("m,nmk->nk", np.asarray(signs), d) * step
            out += np.prod(signs) * np.asarray(fn(x + shift), dtype=float)
        return out / (2.0 * step) ** j

    if not richardson:
        return central(h)
    return (4.0 * central(h) - central(2.0 * h)) / 3.0


class VectorField:
    """Vector field on R^n with scalar-field components."""

    def __init__(self, components: Sequence):
        self.dim = len(components)
        self.components = [as_field(c, self.dim) for c in components]

    @classmethod
    def constant(cls, v) -> "VectorField":
        v = np.asarray(v, dtype=float)
        return cls([Constant(len(v), c) for c in v])

    @property
    def max_depth(self):
        return _depth_min(*(c.max_depth for c in self.components))

    def value(self, x) -> np.ndarray:
        x = _rows(x)
        return np.stack([c.value(x) for c in self.components], axis=1)

    __call__ = value


def as_vector_field(X, dim: int) -> VectorField:
    if isinstance(X, VectorField):
        return X
    v = np.asarray(X, dtype=float)
    if v.shape != (dim,):
        raise ValueError("constant vector has wrong dimension")
    return VectorField.constant(v)


class SmoothMap:
    """Map R^n → R^m with value and Jacobian access."""

    dim_in: int
    dim_out: int
    affine: bool = False

    def value(self, x) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def jacobian(self, x) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def __call__(self, x):
        return self.value(x)


class AffineMap(SmoothMap):
    affine = True

    def __init__(self, A, b=None):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.dim_out, self.dim_in = self.A.shape
        self.b = np.zeros(self.dim_out) if b is None else np.asarray(b, dtype=float)

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(np.eye(n))

    def value(self, x):
        return _rows(x) @ self.A.T + self.b

    def jacobian(self, x):
        x = _rows(x)
        return np.broadcast_to(self.A, (x.shape[0],) + self.A.shape)

    def inverse(self) -> "AffineMap":
        Ai = np.linalg.inv(self.A)
        return AffineMap(Ai, -Ai @ self.b)


class FieldMap(SmoothMap):
    """Map whose components are scalar fields; Jacobian from first derivatives."""

    def __init__(self, components: Sequence[ScalarField]):
        self.components = list(components)
        self.dim_out = len(self.components)
        self.dim_in = self.components[0].dim

    def value(self, x):
        x = _rows(x)
        return np.stack([c.value(x) for c in self.components], axis=1)

    def jacobian(self, x):
        x = _rows(x)
        eye = np.eye(self.dim_in)
        return np.stack([np.stack([c.derivative(x, eye[i]) for i in range(self.dim_in)], axis=1)
                         for c in self.components], axis=1)


class FunctionMap(SmoothMap):
    def __init__(self, dim_in: int, dim_out: int, fn: Callable, jac: Callable | None):
        self.dim_in, self.dim_out, self.fn, self.jac = dim_in, dim_out, fn, jac

    def value(self, x):
        return np.asarray(self.fn(_rows(x)), dtype=float)

    def jacobian(self, x):
        if self.jac is None:
            raise ValueError("Jacobian unavailable for this map")
        return np.asarray(self.jac(_rows(x)), dtype=float)


def pushforward_field(F: AffineMap, X: VectorField) -> VectorField:
    """(F_* X)(q) = A X(F^{-1} q) for an affine diffeomorphism F."""
    if not F.affine:
        raise ValueError("field pushforward implemented for affine maps only")
    inv = F.inverse()
    pulled = [AffineComposition(c, inv.A, inv.b) for c in X.components]
    comps = []
    for a in range(F.dim_out):
        terms = [ScaledField(F.A[a, i], pulled[i]) for i in range(F.dim_in) if F.A[a, i] != 0]
        comps.append(SumField(terms) if terms else Constant(F.dim_out, 0.0))
    return VectorField(comps)
