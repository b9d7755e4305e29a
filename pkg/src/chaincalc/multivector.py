"""Exterior algebra of R^n in the standard orthonormal basis.

Basis blades e_I are indexed by strictly increasing axis tuples I, stored in
lexicographic order.  Every sign is the parity of the permutation that sorts
a concatenation of axis tuples.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

MultiIndex = tuple  # strictly increasing tuple of ints


@lru_cache(maxsize=None)
def blades(n: int, k: int) -> tuple:
    """All grade-k blades of R^n in lexicographic order."""
    if k < 0 or k > n:
        return ()
    return tuple(itertools.combinations(range(n), k))


@lru_cache(maxsize=None)
def blade_index(n: int, k: int) -> dict:
    return {b: i for i, b in enumerate(blades(n, k))}


def nblades(n: int, k: int) -> int:
    return math.comb(n, k) if 0 <= k <= n else 0


def merge_sign(a: Sequence[int], b: Sequence[int]) -> int:
    """Sign of e_a ∧ e_b relative to e_{sorted(a+b)}, or 0 if they overlap."""
    if set(a) & set(b):
        return 0
    inversions = sum(1 for x in a for y in b if x > y)
    return -1 if inversions % 2 else 1


def check_multi_index(axes: Sequence[int], n: int) -> MultiIndex:
    axes = tuple(int(i) for i in axes)
    if any(i < 0 or i >= n for i in axes):
        raise ValueError(f"axis out of range for dimension {n}: {axes}")
    if any(a >= b for a, b in zip(axes, axes[1:])):
        raise ValueError(f"multi-index must be strictly increasing: {axes}")
    return axes


# ---------------------------------------------------------------------------
# dense tables, shared by KVector and the vectorised chain code


@lru_cache(maxsize=None)
def wedge_table(n: int, k: int, m: int):
    """Arrays (ia, ib, ic, sign) with e_{A[ia]} ∧ e_{B[ib]} = sign e_{C[ic]}."""
    ia, ib, ic, sg = [], [], [], []
    out = blade_index(n, k + m)
    for i, a in enumerate(blades(n, k)):
        for j, b in enumerate(blades(n, m)):
            s = merge_sign(a, b)
            if s:
                ia.append(i)
                ib.append(j)
                ic.append(out[tuple(sorted(a + b))])
                sg.append(s)
    return (np.array(ia, dtype=np.intp), np.array(ib, dtype=np.intp),
            np.array(ic, dtype=np.intp), np.array(sg, dtype=float))


@lru_cache(maxsize=None)
def contract_table(n: int, k: int):
    """Arrays (axis, i_in, i_out, sign): contract(e_axis, e_I) has sign·e_{I minus axis}."""
    ax, ii, io, sg = [], [], [], []
    out = blade_index(n, k - 1)
    for i, b in enumerate(blades(n, k)):
        for pos, a in enumerate(b):
            ax.append(a)
            ii.append(i)
            io.append(out[b[:pos] + b[pos + 1:]])
            sg.append(-1.0 if pos % 2 else 1.0)
    return (np.array(ax, dtype=np.intp), np.array(ii, dtype=np.intp),
            np.array(io, dtype=np.intp), np.array(sg, dtype=float))


@lru_cache(maxsize=None)
def hodge_table(n: int, k: int):
    """Arrays (i_out, sign) so that hodge(e_{I_i}) = sign[i] e_{Ic[i_out[i]]}."""
    out = blade_index(n, n - k)
    io, sg = [], []
    for b in blades(n, k):
        comp = tuple(i for i in range(n) if i not in b)
        io.append(out[comp])
        sg.append(float(merge_sign(b, comp)))
    return np.array(io, dtype=np.intp), np.array(sg, dtype=float)


def wedge_dense(n: int, k: int, m: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise wedge of coefficient arrays a (N, C(n,k)) and b (N, C(n,m))."""
    ia, ib, ic, sg = wedge_table(n, k, m)
    out = np.zeros((a.shape[0], nblades(n, k + m)))
    if len(ia):
        np.add.at(out.T, ic, (a[:, ia] * b[:, ib] * sg).T)
    return out


def contract_dense(n: int, k: int, v: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Row-wise contraction of vectors v (N, n) into coefficient rows a (N, C(n,k))."""
    ax, ii, io, sg = contract_table(n, k)
    out = np.zeros((a.shape[0], nblades(n, k - 1)))
    if len(ax):
        np.add.at(out.T, io, (v[:, ax] * a[:, ii] * sg).T)
    return out


def hodge_dense(n: int, k: int, a: np.ndarray) -> np.ndarray:
    io, sg = hodge_table(n, k)
    out = np.empty_like(a)
    out[:, io] = a * sg
    return out


def mass_upper_dense(n: int, k: int, a: np.ndarray) -> np.ndarray:
    """Row-wise mass upper bound; exact Euclidean norm in grades 0, 1, n-1, n."""
    if k in (0, 1, n - 1, n):
        return np.sqrt(np.einsum("ij,ij->i", a, a))
    return np.abs(a).sum(axis=1)


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KVector:
    """Element of Λ^k R^n as a sparse map blade -> coefficient."""

    dim: int
    grade: int
    coeffs: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if not 0 <= self.grade <= self.dim:
            raise ValueError(f"grade {self.grade} out of range for dimension {self.dim}")
        clean = {}
        for key, c in self.coeffs.items():
            key = check_multi_index(key, self.dim)
            if len(key) != self.grade:
                raise ValueError(f"blade {key} does not have grade {self.grade}")
            c = float(c)
            if c != 0.0:
                clean[key] = clean.get(key, 0.0) + c
        object.__setattr__(self, "coeffs", {k: v for k, v in sorted(clean.items()) if v != 0.0})

    # constructors
    @classmethod
    def zero(cls, dim: int, grade: int) -> "KVector":
        return cls(dim, grade, {})

    @classmethod
    def basis(cls, dim: int, axes: Sequence[int], coeff: float = 1.0) -> "KVector":
        axes = tuple(axes)
        s = 1
        if len(set(axes)) != len(axes):
            return cls(dim, len(axes), {})
        order = sorted(range(len(axes)), key=lambda i: axes[i])
        # parity of the sorting permutation
        seen, parity = set(), 0
        for i in range(len(order)):
            if i in seen:
                continue
            j, length = i, 0
            while j not in seen:
                seen.add(j)
                j = order[j]
                length += 1
            parity += length - 1
        if parity % 2:
            s = -1
        return cls(dim, len(axes), {tuple(sorted(axes)): s * coeff})

    @classmethod
    def scalar(cls, dim: int, c: float = 1.0) -> "KVector":
        return cls(dim, 0, {(): c})

    @classmethod
    def from_vector(cls, v: Iterable[float]) -> "KVector":
        v = [float(x) for x in v]
        return cls(len(v), 1, {(i,): x for i, x in enumerate(v)})

    @classmethod
    def from_array(cls, dim: int, grade: int, arr) -> "KVector":
        arr = np.asarray(arr, dtype=float).ravel()
        bl = blades(dim, grade)
        if arr.shape[0] != len(bl):
            raise ValueError("coefficient array has wrong length")
        return cls(dim, grade, {b: c for b, c in zip(bl, arr)})

    @classmethod
    def simple(cls, *vectors) -> "KVector":
        """v1 ∧ ... ∧ vk for vectors given as sequences."""
        if not vectors:
            raise ValueError("need at least one vector; use KVector.scalar for grade 0")
        out = cls.from_vector(vectors[0])
        for v in vectors[1:]:
            out = wedge(out, cls.from_vector(v))
        return out

    # dense view
    def to_array(self) -> np.ndarray:
        idx = blade_index(self.dim, self.grade)
        out = np.zeros(len(idx))
        for b, c in self.coeffs.items():
            out[idx[b]] = c
        return out

    def is_zero(self) -> bool:
        return not self.coeffs

    def norm(self) -> float:
        """Euclidean norm of the coefficient vector."""
        return math.sqrt(sum(c * c for c in self.coeffs.values()))

    def _check(self, other: "KVector"):
        if not isinstance(other, KVector):
            raise TypeError("expected KVector")
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        if other.grade != self.grade:
            raise ValueError("grade mismatch")

    def __add__(self, other: "KVector") -> "KVector":
        self._check(other)
        out = dict(self.coeffs)
        for b, c in other.coeffs.items():
            out[b] = out.get(b, 0.0) + c
        return KVector(self.dim, self.grade, out)

    def __neg__(self) -> "KVector":
        return KVector(self.dim, self.grade, {b: -c for b, c in self.coeffs.items()})

    def __sub__(self, other: "KVector") -> "KVector":
        return self + (-other)

    def __mul__(self, s: float) -> "KVector":
        return KVector(self.dim, self.grade, {b: s * c for b, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (isinstance(other, KVector) and self.dim == other.dim
                and self.grade == other.grade and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.dim, self.grade, tuple(self.coeffs.items())))

    def allclose(self, other: "KVector", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.to_array(), other.to_array(), rtol=0.0, atol=atol))

    def __repr__(self):
        if not self.coeffs:
            return f"KVector(dim={self.dim}, grade={self.grade}, 0)"
        body = " + ".join(f"{c:g}*e{''.join(str(i + 1) for i in b) or '0'}"
                          for b, c in self.coeffs.items())
        return f"KVector(dim={self.dim}, grade={self.grade}, {body})"

    # JSON
    def to_json(self) -> dict:
        return {"dim": self.dim, "grade": self.grade,
                "coeffs": {",".join(str(i) for i in b): c for b, c in self.coeffs.items()}}

    @classmethod
    def from_json(cls, obj: dict) -> "KVector":
        coeffs = {}
        for key, c in obj["coeffs"].items():
            axes = tuple(int(s) for s in key.split(",")) if key else ()
            coeffs[axes] = float(c)
        return cls(int(obj["dim"]), int(obj["grade"]), coeffs)


def _as_kvector(v, dim: int | None = None) -> KVector:
    if isinstance(v, KVector):
        return v
    return KVector.from_vector(v)


def wedge(a: KVector, b: KVector) -> KVector:
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    if a.grade + b.grade > a.dim:
        raise ValueError(f"grade overflow: {a.grade}+{b.grade} > {a.dim}")
    out: dict = {}
    for ia, ca in a.coeffs.items():
        for ib, cb in b.coeffs.items():
            s = merge_sign(ia, ib)
            if s:
                key = tuple(sorted(ia + ib))
                out[key] = out.get(key, 0.0) + s * ca * cb
    return KVector(a.dim, a.grade + b.grade, out)


def contract(v, a: KVector) -> KVector:
    """Interior product of a vector with a k-vector, k >= 1."""
    v = np.asarray(v.to_array() if isinstance(v, KVector) else v, dtype=float)
    if a.grade == 0:
        raise ValueError("cannot contract a grade-0 k-vector")
    if v.shape != (a.dim,):
        raise ValueError("dimension mismatch")
    out: dict = {}
    for b, c in a.coeffs.items():
        for pos, axis in enumerate(b):
            if v[axis] == 0.0:
                continue
            key = b[:pos] + b[pos + 1:]
            sgn = -1.0 if pos % 2 else 1.0
            out[key] = out.get(key, 0.0) + sgn * v[axis] * c
    return KVector(a.dim, a.grade - 1, out)


def hodge_complement(a: KVector) -> KVector:
    """hodge(e_I) = sign(I, I^c) e_{I^c}, so e_I ∧ hodge(e_I) = e_{1..n}."""
    n = a.dim
    out = {}
    for b, c in a.coeffs.items():
        comp = tuple(i for i in range(n) if i not in b)
        out[comp] = merge_sign(b, comp) * c
    return KVector(n, n - a.grade, out)


def mass_simple(a: KVector, factors: Sequence[Sequence[float]], tol: float = 1e-9) -> float:
    """Mass of a simple k-vector given a factorisation a = f_1 ∧ ... ∧ f_k."""
    factors = [np.asarray(f, dtype=float) for f in factors]
    if len(factors) != a.grade:
        raise ValueError("number of factors does not match grade")
    if a.grade == 0:
        return abs(a.coeffs.get((), 0.0))
    if any(f.shape != (a.dim,) for f in factors):
        raise ValueError("factor dimension mismatch")
    rebuilt = KVector.simple(*factors)
    if not a.allclose(rebuilt, atol=tol * max(1.0, a.norm())):
        raise ValueError("factors do not reproduce the k-vector")
    F = np.stack(factors)
    return math.sqrt(max(float(np.linalg.det(F @ F.T)), 0.0))


def mass_upper(a: KVector) -> float:
    """Upper bound on the mass norm; exact in grades 0, 1, n-1, n and on single blades."""
    if a.grade in (0, 1, a.dim - 1, a.dim):
        return a.norm()
    return float(sum(abs(c) for c in a.coeffs.values()))
