"""Differential forms, the integral pairing with chains, dual operators, norms
and mollification.

A k-form is stored as coefficient fields a_I (one per blade), so that
ω_p(α) = Σ_I a_I(p) α_I.  A chain term carrying markers v_1..v_j pairs with ω
through the mixed directional derivative D_{v_1}...D_{v_j} of p ↦ ω_p(α).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import multivector as mv
from .chain import DiffChain, lambda_k
from .fields import (AffineComposition, Constant, DepthError, DirectionalDerivativeField,
                     ProductField, ScalarField, ScaledField, SmoothMap, SumField,
                     VectorField, _dirs, _rows, as_field, fd_derivative)


class DerivativeMode(enum.Enum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite_difference"


@dataclass(frozen=True, eq=False)
class FormSpec:
    dim: int
    grade: int
    coefficients: Mapping = field(default_factory=dict)
    mode: DerivativeMode = DerivativeMode.ANALYTIC
    fd_step: float = 1e-4
    richardson: bool = True
    declared_norm_bounds: Mapping = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if not 0 <= self.grade <= self.dim:
            raise ValueError("grade out of range")
        coeffs = {}
        for b, f in self.coefficients.items():
            b = mv.check_multi_index(b, self.dim)
            if len(b) != self.grade:
                raise ValueError(f"blade {b} does not have grade {self.grade}")
            f = as_field(f, self.dim)
            if f.dim != self.dim:
                raise ValueError("coefficient field dimension mismatch")
            coeffs[b] = f
        object.__setattr__(self, "coefficients", dict(sorted(coeffs.items())))
        object.__setattr__(self, "declared_norm_bounds",
                           {int(r): float(v) for r, v in self.declared_norm_bounds.items()})

    @property
    def depth(self):
        """Largest marker depth the analytic coefficients support (None: unlimited)."""
        if self.mode is DerivativeMode.FINITE_DIFFERENCE:
            return None
        depths = [f.max_depth for f in self.coefficients.values() if f.max_depth is not None]
        return min(depths) if depths else None

    def coefficient_array(self, x, dirs=None) -> np.ndarray:
        """(N, B) array of D_dirs a_I at the rows of x."""
        x = _rows(x)
        d = _dirs(x, dirs)
        idx = mv.blade_index(self.dim, self.grade)
        out = np.zeros((x.shape[0], len(idx)))
        for b, f in self.coefficients.items():
            if self.mode is DerivativeMode.FINITE_DIFFERENCE and d.shape[1]:
                out[:, idx[b]] = fd_derivative(f.value, x, d, self.fd_step, self.richardson)
            else:
                out[:, idx[b]] = f.derivative(x, d)
        return out

    def at(self, x, alpha, dirs=None) -> np.ndarray:
        """D_dirs ω_x(α) for coefficient rows alpha (N, B)."""
        return np.einsum("ij,ij->i", self.coefficient_array(x, dirs), np.atleast_2d(alpha))

    # linear structure
    def _combine(self, other: "FormSpec", s: float) -> "FormSpec":
        if (other.dim, other.grade) != (self.dim, self.grade):
            raise ValueError("form dimension/grade mismatch")
        coeffs = dict(self.coefficients)
        for b, f in other.coefficients.items():
            g = ScaledField(s, f) if s != 1.0 else f
            coeffs[b] = SumField([coeffs[b], g]) if b in coeffs else g
        return FormSpec(self.dim, self.grade, coeffs, self.mode, self.fd_step, self.richardson)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, s: float):
        bounds = {r: abs(s) * v for r, v in self.declared_norm_bounds.items()}
        return replace(self, coefficients={b: ScaledField(s, f) for b, f in self.coefficients.items()},
                       declared_norm_bounds=bounds, name="")

    __rmul__ = __mul__

    def with_mode(self, mode: DerivativeMode, fd_step: float | None = None,
                  richardson: bool | None = None) -> "FormSpec":
        return replace(self, mode=mode, fd_step=self.fd_step if fd_step is None else fd_step,
                       richardson=self.richardson if richardson is None else richardson)


def constant_form(dim: int, coeffs: Mapping) -> FormSpec:
    """Constant-coefficient form; declared bound Σ|c_I| (Euclidean in grades 0, 1, n−1, n)."""
    grade = len(next(iter(coeffs)))
    form = FormSpec(dim, grade, {b: Constant(dim, c) for b, c in coeffs.items()})
    c = np.array(list(coeffs.values()), dtype=float)
    bound = float(np.linalg.norm(c)) if grade in (0, 1, dim - 1, dim) else float(np.abs(c).sum())
    return replace(form, declared_norm_bounds={r: bound for r in range(8)})


def scalar_form(f: ScalarField) -> FormSpec:
    """A function viewed as a 0-form."""
    return FormSpec(f.dim, 0, {(): f})


# ---------------------------------------------------------------------------
# the integral


def evaluate(omega: FormSpec, A: DiffChain) -> float:
    """Σ over terms of D_{markers} ω_p(α)."""
    if omega.dim != A.dim or omega.grade != A.grade:
        raise ValueError(f"form ({omega.dim},{omega.grade}) cannot pair with chain "
                         f"({A.dim},{A.grade})")
    if len(A) == 0:
        return 0.0
    depth = omega.depth
    if depth is not None and A.max_depth > depth:
        raise DepthError(f"form supplies derivatives to depth {depth}, chain needs {A.max_depth}")
    total = 0.0
    for j in np.unique(A.depth):
        rows = np.flatnonzero(A.depth == j)
        vals = omega.at(A.points[rows], A.coeffs[rows], A.markers[rows, :j])
        total += math.fsum(vals)
    return total


# ---------------------------------------------------------------------------
# dual operators


def _sum_fields(fields, dim):
    fields = [f for f in fields if f is not None]
    if not fields:
        return None
    return fields[0] if len(fields) == 1 else SumField(fields)


def exterior_derivative(omega: FormSpec) -> FormSpec:
    """dω = Σ_I Σ_i ∂_i a_I dx^i ∧ dx^I; dual to boundary."""
    n, k = omega.dim, omega.grade
    if k >= n:
        raise ValueError("exterior derivative of a top-degree form")
    eye = np.eye(n)
    terms: dict = {}
    for b, f in omega.coefficients.items():
        for i in range(n):
            s = mv.merge_sign((i,), b)
            if s:
                key = tuple(sorted((i,) + b))
                terms.setdefault(key, []).append(ScaledField(s, DirectionalDerivativeField(f, eye[i])))
    return replace(omega, grade=k + 1, coefficients={b: _sum_fields(v, n) for b, v in terms.items()},
                   declared_norm_bounds={}, name="")


def interior_product(X, omega: FormSpec) -> FormSpec:
    """ι_X ω, (ι_X ω)(β) = ω(X ∧ β); dual to extrusion."""
    n, k = omega.dim, omega.grade
    if k == 0:
        raise ValueError("interior product of a 0-form")
    X = _as_vf(X, n)
    terms: dict = {}
    for b, f in omega.coefficients.items():
        for pos, i in enumerate(b):
            rest = b[:pos] + b[pos + 1:]
            s = -1.0 if pos % 2 else 1.0
            terms.setdefault(rest, []).append(ScaledField(s, ProductField(X.components[i], f)))
    return replace(omega, grade=k - 1, coefficients={b: _sum_fields(v, n) for b, v in terms.items()},
                   declared_norm_bounds={}, name="")


def flat_wedge(X, omega: FormSpec) -> FormSpec:
    """X♭ ∧ ω; dual to retraction."""
    n, k = omega.dim, omega.grade
    if k >= n:
        raise ValueError("X♭ ∧ ω overflows the top degree")
    X = _as_vf(X, n)
    terms: dict = {}
    for b, f in omega.coefficients.items():
        for i in range(n):
            s = mv.merge_sign((i,), b)
            if s:
                key = tuple(sorted((i,) + b))
                terms.setdefault(key, []).append(ScaledField(s, ProductField(X.components[i], f)))
    return replace(omega, grade=k + 1, coefficients={b: _sum_fields(v, n) for b, v in terms.items()},
                   declared_norm_bounds={}, name="")


def lie_derivative(v, omega: FormSpec) -> FormSpec:
    """L_v ω for a constant direction v; dual to prederivative."""
    v = np.asarray(v, dtype=float)
    return replace(omega, coefficients={b: DirectionalDerivativeField(f, v)
                                        for b, f in omega.coefficients.items()},
                   declared_norm_bounds={}, name="")


def multiply(f, omega: FormSpec) -> FormSpec:
    """f ω; dual to multiplication of chains by f."""
    f = as_field(f, omega.dim)
    return replace(omega, coefficients={b: ProductField(f, g) for b, g in omega.coefficients.items()},
                   declared_norm_bounds={}, name="")


def hodge_star(omega: FormSpec) -> FormSpec:
    """Adjoint of perp: (⋆ω)(α) = ω(⊥α), taking (n−k)-forms to k-forms."""
    n, j = omega.dim, omega.grade
    k = n - j
    coeffs = {}
    for b in mv.blades(n, k):
        comp = tuple(i for i in range(n) if i not in b)
        if comp in omega.coefficients:
            coeffs[b] = ScaledField(mv.merge_sign(b, comp), omega.coefficients[comp])
    return replace(omega, grade=k, coefficients=coeffs, name="")


def codifferential(omega: FormSpec) -> FormSpec:
    """⋆d⋆, dual to diamond."""
    return hodge_star(exterior_derivative(hodge_star(omega)))


def laplacian(omega: FormSpec) -> FormSpec:
    """δd + dδ (with δ = ⋆d⋆), dual to box."""
    n, k = omega.dim, omega.grade
    parts = []
    if k < n:
        parts.append(codifferential(exterior_derivative(omega)))
    if k > 0:
        parts.append(exterior_derivative(codifferential(omega)))
    out = parts[0]
    for p in parts[1:]:
        out = out + p
    return out


def _as_vf(X, n) -> VectorField:
    if isinstance(X, VectorField):
        return X
    return VectorField.constant(np.asarray(X, dtype=float))


class _PullbackCoefficient(ScalarField):
    """Coefficient of F*ω on one input blade.

    Values are exact.  For affine F derivatives are exact too (composition
    with constant minors); otherwise derivatives are finite differences.
    """

    def __init__(self, F: SmoothMap, omega: FormSpec, col: int):
        self.F, self.omega, self.col = F, omega, col
        self.dim = F.dim_in
        self.max_depth = None

    def _values(self, x):
        M = lambda_k(self.F.jacobian(x), self.omega.grade)
        return np.einsum("na,na->n", self.omega.coefficient_array(self.F.value(x)), M[:, :, self.col])

    def _derivative(self, x, d):
        if d.shape[1] == 0:
            return self._values(x)
        if self.F.affine:
            M = lambda_k(self.F.jacobian(x[:1]), self.omega.grade)[0, :, self.col]
            dd = d @ self.F.A.T
            return self.omega.coefficient_array(self.F.value(x), dd) @ M
        return fd_derivative(self._values, x, d)


def pullback(F: SmoothMap, omega: FormSpec) -> FormSpec:
    """(F*ω)_p(α) = ω_{F(p)}(Λ^k DF_p α); dual to pushforward."""
    if F.dim_out != omega.dim:
        raise ValueError("map target dimension does not match the form")
    k = omega.grade
    if k > F.dim_in:
        return FormSpec(F.dim_in, 0, {})
    coeffs = {b: _PullbackCoefficient(F, omega, i) for i, b in enumerate(mv.blades(F.dim_in, k))}
    return FormSpec(F.dim_in, k, coeffs, omega.mode, omega.fd_step, omega.richardson)


# ---------------------------------------------------------------------------
# norms


@dataclass(frozen=True)
class Region:
    lo: np.ndarray
    hi: np.ndarray

    def __init__(self, lo, hi):
        object.__setattr__(self, "lo", np.asarray(lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(hi, dtype=float))
        if self.lo.shape != self.hi.shape or np.any(self.hi <= self.lo):
            raise ValueError("region must be a nondegenerate box")

    @classmethod
    def parse(cls, spec) -> "Region":
        """From [lo0, hi0, lo1, hi1, ...]."""
        v = np.asarray(spec, dtype=float).reshape(-1, 2)
        return cls(v[:, 0], v[:, 1])

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))


CHUNK = 4096


def _unit_vectors(rng, m, n):
    v = rng.standard_normal((m, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _unit_simple(rng, m, n, k):
    """Random unit simple k-vectors as coefficient rows; basis blades mixed in."""
    B = mv.nblades(n, k)
    if k == 0:
        return np.ones((m, 1))
    vecs = [_unit_vectors(rng, m, n) for _ in range(k)]
    Q = np.linalg.qr(np.stack(vecs, axis=2))[0]  # orthonormal columns (m, n, k)
    out = np.ones((m, 1))
    grade = 0
    for c in range(k):
        out = mv.wedge_dense(n, grade, 1, out, Q[:, :, c])
        grade += 1
    eye = np.eye(B)
    out[: min(B, m)] = eye[: min(B, m)]
    return out


def _alpha_sup(n, k, coeff_rows, rng):
    """sup over unit simple α of |c·α| per row (exact where every k-vector is simple)."""
    if k in (0, 1, n - 1, n):
        return np.linalg.norm(coeff_rows, axis=1)
    alphas = _unit_simple(rng, coeff_rows.shape[0], n, k)
    return np.abs(np.einsum("ij,ij->i", coeff_rows, alphas))


def _chunks(samples: int):
    """Chunk sizes; a smaller budget always uses a prefix of a larger one's samples."""
    full, rest = divmod(int(samples), CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _separations(rng, m, diam):
    return diam * 10.0 ** rng.uniform(-4.0, -0.5, size=m)


def form_norm_estimate(omega: FormSpec, r: int, region: Region, samples: int = 20000,
                       seed: int = 0) -> float:
    """Sampled lower bound on max(|ω|_{C^0}, ..., |ω|_{C^{r−1}}, |ω|_{L^r}) over region.

    For r = 0 this is |ω|_{C^0}.  The Lipschitz part samples difference
    quotients of D^{r−1}ω over log-spaced separations.
    """
    n, k = omega.dim, omega.grade
    parts = r + 1
    best = 0.0
    for ci, m in enumerate(_chunks(samples)):
        rng = np.random.default_rng([seed, ci])
        x = region.lo + (region.hi - region.lo) * rng.random((m, n))
        comp = np.arange(m) % parts
        for j in range(parts):
            rows = comp == j
            mj = int(rows.sum())
            if not mj:
                continue
            xj = x[rows]
            if j < r or r == 0:
                d = np.stack([_unit_vectors(rng, mj, n) for _ in range(j)], axis=1) if j else None
                val = _alpha_sup(n, k, omega.coefficient_array(xj, d), rng)
            else:
                d = np.stack([_unit_vectors(rng, mj, n) for _ in range(r - 1)], axis=1) if r > 1 else None
                w = _unit_vectors(rng, mj, n)
                s = _separations(rng, mj, region.diameter)
                y = xj + s[:, None] * w
                inside = np.all((y >= region.lo) & (y <= region.hi), axis=1)
                y = np.where(inside[:, None], y, xj - s[:, None] * w)
                ok = np.all((y >= region.lo) & (y <= region.hi), axis=1)
                diff = omega.coefficient_array(y, d) - omega.coefficient_array(xj, d)
                val = np.where(ok, _alpha_sup(n, k, diff, rng) / s, 0.0)
            best = max(best, float(val.max()))
    return best


def difference_norm_probe(omega: FormSpec, r: int, region: Region, samples: int = 20000,
                          seed: int = 0) -> float:
    """Sampled lower bound on max_{j ≤ r} |ω|_{B^j} over difference chains in region.

    |ω|_{B^j} = sup |ω(Δ_U^j(p; α))| / (‖u_1‖...‖u_j‖ ‖α‖).
    """
    n, k = omega.dim, omega.grade
    best = 0.0
    for ci, m in enumerate(_chunks(samples)):
        rng = np.random.default_rng([seed, 10_000 + ci])
        comp = np.arange(m) % (r + 1)
        for j in range(r + 1):
            mj = int((comp == j).sum())
            if not mj:
                continue
            if j == 0:
                x = region.lo + (region.hi - region.lo) * rng.random((mj, n))
                val = _alpha_sup(n, k, omega.coefficient_array(x), rng)
                best = max(best, float(val.max()))
                continue
            U = np.stack([_unit_vectors(rng, mj, n) * _separations(rng, mj, region.diameter)[:, None]
                          for _ in range(j)], axis=1)  # (mj, j, n)
            corners = np.stack([np.einsum("m,nmk->nk", np.array([mask >> b & 1 for b in range(j)], float), U)
                                for mask in range(1 << j)], axis=1)  # (mj, 2^j, n)
            lo = region.lo - corners.min(axis=1)
            hi = region.hi - corners.max(axis=1)
            ok = np.all(hi > lo, axis=1)
            x = lo + (hi - lo) * rng.random((mj, n))
            total = np.zeros((mj, mv.nblades(n, k)))
            for mask in range(1 << j):
                sign = -1.0 if (j - bin(mask).count("1")) % 2 else 1.0
                total += sign * omega.coefficient_array(x + corners[:, mask])
            scale = np.prod(np.linalg.norm(U, axis=2), axis=1)
            val = np.where(ok, _alpha_sup(n, k, total, rng) / scale, 0.0)
            best = max(best, float(val.max()))
    return best


# ---------------------------------------------------------------------------
# mollification


def bump(r: np.ndarray) -> np.ndarray:
    """Smooth radial bump supported in the unit ball."""
    out = np.zeros_like(r)
    inside = r < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


class _Mollified(ScalarField):
    def __init__(self, f: ScalarField, offsets: np.ndarray, weights: np.ndarray):
        self.f, self.offsets, self.weights = f, offsets, weights
        self.dim = f.dim
        self.max_depth = f.max_depth

    def _derivative(self, x, d):
        N, Q = x.shape[0], self.offsets.shape[0]
        xs = (x[:, None, :] + self.offsets[None, :, :]).reshape(N * Q, self.dim)
        ds = np.repeat(d, Q, axis=0)
        vals = self.f.derivative(xs, ds).reshape(N, Q)
        return vals @ self.weights


def mollifier_nodes(n: int, eta: float, order: int = 8):
    """Offsets and normalised weights of the radial kernel on [−η, η]^n."""
    t, w = leggauss(order)
    grids = np.meshgrid(*[t] * n, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wts = np.ones(len(pts))
    for g in np.meshgrid(*[w] * n, indexing="ij"):
        wts = wts * g.ravel()
    wts = wts * bump(np.linalg.norm(pts, axis=1))
    keep = wts > 0
    pts, wts = pts[keep], wts[keep]
    return eta * pts, wts / wts.sum()


def mollify(omega: FormSpec, eta: float, order: int = 8) -> FormSpec:
    """ω_η(x) = ∫ κ_η(v) ω(x + v) dv with a normalised radial bump κ_η."""
    if not eta > 0:
        raise ValueError("mollification radius must be positive")
    offsets, weights = mollifier_nodes(omega.dim, eta, order)
    coeffs = {b: _Mollified(f, offsets, weights) for b, f in omega.coefficients.items()}
    return replace(omega, coefficients=coeffs, name=f"{omega.name}_eta{eta:g}" if omega.name else "")
