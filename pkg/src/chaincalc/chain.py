"""Differential chains: finite sums of pointed terms P_{v1}...P_{vj}(p; α).

A chain is stored column-wise so that chains with millions of terms stay
cheap:

* ``points``  (N, n)     base points p
* ``coeffs``  (N, B)     coefficients of α in the lexicographic blade basis
* ``depth``   (N,)       number of markers j on each term
* ``markers`` (N, J, n)  marker directions, zero-padded past ``depth``

Canonical form sorts each term's markers, merges terms with identical
(point, markers) and drops zero terms.  Terms come out in lexicographic order
of (point, depth, markers), so canonical chains compare by array equality.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import multivector as mv
from .fields import (ScalarField, SmoothMap, VectorField, as_field, as_vector_field,
                     _dirs)
from .multivector import KVector

MARKER_DIGITS = 12
DEPTH_DTYPE = np.int16


@dataclass(frozen=True)
class ChainTerm:
    point: tuple
    alpha: KVector
    markers: tuple = ()

    def __post_init__(self):
        n = self.alpha.dim
        object.__setattr__(self, "point", tuple(float(x) for x in self.point))
        object.__setattr__(self, "markers", tuple(tuple(float(x) for x in m) for m in self.markers))
        if len(self.point) != n or any(len(m) != n for m in self.markers):
            raise ValueError("point, markers and alpha must share the ambient dimension")


def _sort_markers(markers: np.ndarray, depth: np.ndarray) -> np.ndarray:
    """Sort each row's active markers lexicographically on rounded components."""
    N, J, n = markers.shape
    if J < 2:
        return markers
    m = markers.copy()
    key = np.round(m, MARKER_DIGITS)
    rows = np.arange(N)
    for _ in range(J - 1):
        for s in range(J - 1):
            active = depth > s + 1
            a, b = key[:, s], key[:, s + 1]
            differ = a != b
            first = np.argmax(differ, axis=1)
            swap = active & differ.any(axis=1) & (b[rows, first] < a[rows, first])
            if swap.any():
                m[swap, s], m[swap, s + 1] = m[swap, s + 1].copy(), m[swap, s].copy()
                key[swap, s], key[swap, s + 1] = key[swap, s + 1].copy(), key[swap, s].copy()
    return m


def _strictly_sorted(K: np.ndarray) -> bool:
    if K.shape[0] < 2:
        return True
    prev, nxt = K[:-1], K[1:]
    differ = prev != nxt
    if not differ.any(axis=1).all():
        return False
    first = np.argmax(differ, axis=1)
    rows = np.arange(K.shape[0] - 1)
    return bool((nxt[rows, first] > prev[rows, first]).all())


def _group_sum(values: np.ndarray, gid: np.ndarray, starts: np.ndarray) -> np.ndarray:
    """Per-group sums; inside a group, terms are added largest magnitude first
    with opposite signs adjacent, so sign-flipped duplicates cancel exactly."""
    out = np.empty((len(starts), values.shape[1]))
    for b in range(values.shape[1]):
        c = values[:, b]
        order = np.lexsort((c, -np.abs(c), gid))
        out[:, b] = np.add.reduceat(c[order], starts)
    return out


def _canonicalize(n, points, coeffs, depth, markers):
    N = points.shape[0]
    if N:
        J = markers.shape[1]
        keep = (coeffs != 0).any(axis=1)
        if J:
            slot = np.arange(J)[None, :] < depth[:, None]
            zero_marker = ((markers == 0).all(axis=2) & slot).any(axis=1)
            keep &= ~zero_marker
        if not keep.all():
            points, coeffs, depth, markers = points[keep], coeffs[keep], depth[keep], markers[keep]
    J = int(depth.max()) if depth.size else 0
    markers = markers[:, :J]
    if J:
        markers = _sort_markers(markers, depth)
        key = np.concatenate([points, depth[:, None].astype(float),
                              markers.reshape(len(points), -1)], axis=1)
    else:
        key = points
    if _strictly_sorted(key):
        return points, coeffs, depth, markers
    order = np.lexsort(key.T[::-1])
    same = key is points
    key = key[order]
    points = key if same else points[order]
    coeffs, depth, markers = coeffs[order], depth[order], markers[order]
    del order
    new_group = np.ones(len(key), dtype=bool)
    new_group[1:] = (key[1:] != key[:-1]).any(axis=1)
    if new_group.all():
        return points, coeffs, depth, markers
    starts = np.flatnonzero(new_group)
    gid = np.cumsum(new_group) - 1
    summed = _group_sum(coeffs, gid, starts)
    points, depth, markers = points[starts], depth[starts], markers[starts]
    keep = (summed != 0).any(axis=1)
    points, summed, depth, markers = points[keep], summed[keep], depth[keep], markers[keep]
    J = int(depth.max()) if depth.size else 0
    return points, summed, depth, markers[:, :J]


class DiffChain:
    """Immutable finite differential chain of fixed dimension and grade."""

    __slots__ = ("dim", "grade", "points", "coeffs", "depth", "markers")

    def __init__(self, dim: int, grade: int, points=None, coeffs=None, depth=None,
                 markers=None, *, canonical: bool = False):
        if dim < 1 or not 0 <= grade <= dim:
            raise ValueError(f"invalid dimension/grade ({dim}, {grade})")
        B = mv.nblades(dim, grade)
        points = np.zeros((0, dim)) if points is None else np.asarray(points, dtype=float)
        points = points.reshape(-1, dim)
        N = points.shape[0]
        coeffs = np.zeros((N, B)) if coeffs is None else np.asarray(coeffs, dtype=float)
        coeffs = coeffs.reshape(N, B)
        if markers is None:
            markers = np.zeros((N, 0, dim))
        markers = np.asarray(markers, dtype=float)
        markers = markers.reshape(N, markers.shape[1] if markers.ndim == 3 else -1, dim)
        if depth is None:
            depth = np.full(N, markers.shape[1], dtype=DEPTH_DTYPE)
        depth = np.asarray(depth, dtype=DEPTH_DTYPE).reshape(N)
        if not canonical:
            points, coeffs, depth, markers = _canonicalize(dim, points, coeffs, depth, markers)
        for a in (points, coeffs, depth, markers):
            a.flags.writeable = False
        self.dim, self.grade = dim, grade
        self.points, self.coeffs, self.depth, self.markers = points, coeffs, depth, markers

    # construction helpers
    @classmethod
    def zero(cls, dim: int, grade: int) -> "DiffChain":
        return cls(dim, grade)

    @classmethod
    def point(cls, p, alpha: KVector | float = 1.0, markers: Sequence = ()) -> "DiffChain":
        p = np.asarray(p, dtype=float)
        if not isinstance(alpha, KVector):
            alpha = KVector.scalar(len(p), float(alpha))
        return cls.from_terms([ChainTerm(tuple(p), alpha, tuple(markers))])

    @classmethod
    def from_terms(cls, terms: Iterable[ChainTerm], dim: int | None = None,
                   grade: int | None = None) -> "DiffChain":
        terms = list(terms)
        if not terms:
            if dim is None or grade is None:
                raise ValueError("empty term list needs dim and grade")
            return cls(dim, grade)
        dim = terms[0].alpha.dim if dim is None else dim
        grade = terms[0].alpha.grade if grade is None else grade
        J = max(len(t.markers) for t in terms)
        pts = np.array([t.point for t in terms], dtype=float).reshape(-1, dim)
        co = np.zeros((len(terms), mv.nblades(dim, grade)))
        mk = np.zeros((len(terms), J, dim))
        dp = np.zeros(len(terms), dtype=DEPTH_DTYPE)
        for i, t in enumerate(terms):
            if t.alpha.dim != dim or t.alpha.grade != grade:
                raise ValueError("terms must share dimension and grade")
            co[i] = t.alpha.to_array()
            dp[i] = len(t.markers)
            if t.markers:
                mk[i, :len(t.markers)] = t.markers
        return cls(dim, grade, pts, co, dp, mk)

    # views
    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def max_depth(self) -> int:
        return self.markers.shape[1]

    @property
    def marker_free(self) -> bool:
        return self.max_depth == 0

    def terms(self) -> list:
        out = []
        for i in range(len(self)):
            alpha = KVector.from_array(self.dim, self.grade, self.coeffs[i])
            marks = tuple(tuple(m) for m in self.markers[i, :self.depth[i]])
            out.append(ChainTerm(tuple(self.points[i]), alpha, marks))
        return out

    def __repr__(self):
        return f"DiffChain(dim={self.dim}, grade={self.grade}, terms={len(self)}, depth={self.max_depth})"

    # linear structure
    def _check(self, other: "DiffChain"):
        if not isinstance(other, DiffChain):
            raise TypeError("expected DiffChain")
        if other.dim != self.dim or other.grade != self.grade:
            raise ValueError(f"dimension/grade mismatch: ({self.dim},{self.grade}) vs "
                             f"({other.dim},{other.grade})")

    def __add__(self, other: "DiffChain") -> "DiffChain":
        self._check(other)
        return concat([self, other])

    def __neg__(self) -> "DiffChain":
        return self._replace(coeffs=-self.coeffs, canonical=True)

    def __sub__(self, other: "DiffChain") -> "DiffChain":
        return self + (-other)

    def __mul__(self, s: float) -> "DiffChain":
        return scale(s, self)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (isinstance(other, DiffChain) and self.dim == other.dim
                and self.grade == other.grade and len(self) == len(other)
                and np.array_equal(self.points, other.points)
                and np.array_equal(self.coeffs, other.coeffs)
                and np.array_equal(self.depth, other.depth)
                and np.array_equal(self.markers, other.markers))

    __hash__ = None

    def is_zero(self) -> bool:
        return len(self) == 0

    def allclose(self, other: "DiffChain", atol: float = 1e-12) -> bool:
        """Coefficient comparison after cancelling: ‖self − other‖_coeff ≤ atol."""
        diff = self - other
        return len(diff) == 0 or float(np.abs(diff.coeffs).max()) <= atol

    def _replace(self, *, dim=None, grade=None, points=None, coeffs=None, depth=None,
                 markers=None, canonical=False) -> "DiffChain":
        return DiffChain(self.dim if dim is None else dim,
                         self.grade if grade is None else grade,
                         self.points if points is None else points,
                         self.coeffs if coeffs is None else coeffs,
                         self.depth if depth is None else depth,
                         self.markers if markers is None else markers,
                         canonical=canonical)

    # JSON
    def to_json(self) -> dict:
        return {"dim": self.dim, "grade": self.grade,
                "terms": [{"point": list(t.point), "alpha": t.alpha.to_json()["coeffs"],
                           "markers": [list(m) for m in t.markers]} for t in self.terms()]}

    @classmethod
    def from_json(cls, obj: dict) -> "DiffChain":
        dim, grade = int(obj["dim"]), int(obj["grade"])
        terms = []
        for t in obj["terms"]:
            alpha = KVector.from_json({"dim": dim, "grade": grade, "coeffs": t["alpha"]})
            terms.append(ChainTerm(tuple(t["point"]), alpha, tuple(tuple(m) for m in t.get("markers", []))))
        return cls.from_terms(terms, dim, grade)


def concat(chains: Sequence[DiffChain]) -> DiffChain:
    """Sum of chains with a common dimension and grade."""
    chains = list(chains)
    first = chains[0]
    for c in chains[1:]:
        first._check(c)
    chains = [c for c in chains if len(c)] or [first]
    if len(chains) == 1:
        return chains[0]
    J = max(c.max_depth for c in chains)
    mk = []
    for c in chains:
        m = c.markers
        if m.shape[1] < J:
            m = np.concatenate([m, np.zeros((len(c), J - m.shape[1], c.dim))], axis=1)
        mk.append(m)
    return DiffChain(first.dim, first.grade,
                     np.concatenate([c.points for c in chains]),
                     np.concatenate([c.coeffs for c in chains]),
                     np.concatenate([c.depth for c in chains]),
                     np.concatenate(mk))


# ---------------------------------------------------------------------------
# operators


def add(A: DiffChain, B: DiffChain) -> DiffChain:
    return A + B


def scale(s: float, A: DiffChain) -> DiffChain:
    s = float(s)
    if s == 0.0:
        return DiffChain(A.dim, A.grade)
    return A._replace(coeffs=s * A.coeffs, canonical=True)


def translate(u, A: DiffChain) -> DiffChain:
    u = np.asarray(u, dtype=float)
    if u.shape != (A.dim,):
        raise ValueError("translation vector has wrong dimension")
    return A._replace(points=A.points + u)


def difference(U: Sequence, A: DiffChain) -> DiffChain:
    """Δ_{u_1} ... Δ_{u_j} A as 2^j signed translates."""
    U = [np.asarray(u, dtype=float) for u in U]
    j = len(U)
    if j == 0:
        return A
    parts = []
    for mask in range(1 << j):
        shift = np.zeros(A.dim)
        size = 0
        for m in range(j):
            if mask >> m & 1:
                shift = shift + U[m]
                size += 1
        sign = -1.0 if (j - size) % 2 else 1.0
        parts.append((A.points + shift, sign * A.coeffs))
    N = len(A)
    return DiffChain(A.dim, A.grade,
                     np.concatenate([p for p, _ in parts]),
                     np.concatenate([c for _, c in parts]),
                     np.tile(A.depth, 1 << j), np.tile(A.markers, (1 << j, 1, 1)))


def _leibniz(A: DiffChain, f: ScalarField, coeffs: np.ndarray | None = None):
    """Pieces of m_f applied to the terms of A (coefficients optionally replaced).

    A term (p; α; M) maps to Σ_{S ⊆ M} (p; (D_S f)(p) α; M \\ S).
    """
    coeffs = A.coeffs if coeffs is None else coeffs
    pts, cos, dps, mks = [], [], [], []
    J = A.max_depth
    for j in np.unique(A.depth):
        rows = np.flatnonzero(A.depth == j)
        p = A.points[rows]
        m = A.markers[rows, :j]
        for mask in range(1 << j):
            S = [s for s in range(j) if mask >> s & 1]
            rest = [s for s in range(j) if not mask >> s & 1]
            vals = f.derivative(p, m[:, S, :])
            pad = np.zeros((len(rows), J, A.dim))
            pad[:, :len(rest)] = m[:, rest]
            pts.append(p)
            cos.append(coeffs[rows] * vals[:, None])
            dps.append(np.full(len(rows), len(rest), dtype=DEPTH_DTYPE))
            mks.append(pad)
    return pts, cos, dps, mks


def _assemble(dim, grade, pieces) -> DiffChain:
    pts, cos, dps, mks = pieces
    if not pts:
        return DiffChain(dim, grade)
    return DiffChain(dim, grade, np.concatenate(pts), np.concatenate(cos),
                     np.concatenate(dps), np.concatenate(mks))


def multiply_function(f, A: DiffChain) -> DiffChain:
    """m_f A; f needs derivatives up to the marker depth of A."""
    f = as_field(f, A.dim)
    return _assemble(A.dim, A.grade, _leibniz(A, f))


def _vector_op(X, A: DiffChain, grade_out: int, op) -> DiffChain:
    """Σ_i m_{X_i} applied to op(e_i, A); constant X skips the Leibniz step."""
    if isinstance(X, VectorField):
        eye = np.eye(A.dim)
        pieces = ([], [], [], [])
        for i, comp in enumerate(X.components):
            base = op(np.broadcast_to(eye[i], (len(A), A.dim)))
            for acc, part in zip(pieces, _leibniz(A, comp, base)):
                acc.extend(part)
        return _assemble(A.dim, grade_out, pieces)
    v = np.asarray(X, dtype=float)
    if v.shape != (A.dim,):
        raise ValueError("vector has wrong dimension")
    return A._replace(grade=grade_out, coeffs=op(np.broadcast_to(v, (len(A), A.dim))))


def extrude(X, A: DiffChain) -> DiffChain:
    """E_X A = (p; X(p) ∧ α) on marker-free terms; dual to interior product."""
    if A.grade + 1 > A.dim:
        raise ValueError("grade overflow in extrusion")
    n, k = A.dim, A.grade
    return _vector_op(X, A, k + 1, lambda v: mv.wedge_dense(n, 1, k, v, A.coeffs))


def retract(X, A: DiffChain) -> DiffChain:
    """E†_X A = (p; contract(X(p), α)) on marker-free terms; dual to X♭ ∧ ."""
    if A.grade == 0:
        raise ValueError("cannot retract a grade-0 chain")
    n, k = A.dim, A.grade
    return _vector_op(X, A, k - 1, lambda v: mv.contract_dense(n, k, v, A.coeffs))


def _append_marker(A: DiffChain, v: np.ndarray, coeffs=None, grade=None):
    N, J = len(A), A.max_depth
    mk = np.zeros((N, J + 1, A.dim))
    mk[:, :J] = A.markers
    mk[np.arange(N), A.depth] = v
    return (A.points, A.coeffs if coeffs is None else coeffs, A.depth + 1, mk)


def prederivative(v, A: DiffChain) -> DiffChain:
    v = np.asarray(v, dtype=float)
    if v.shape != (A.dim,):
        raise ValueError("marker has wrong dimension")
    p, c, d, m = _append_marker(A, v)
    return DiffChain(A.dim, A.grade, p, c, d, m)


def boundary(A: DiffChain) -> DiffChain:
    """∂ = Σ_i P_{e_i} E†_{e_i}."""
    n, k = A.dim, A.grade
    if k == 0:
        raise ValueError("boundary of a grade-0 chain is undefined")
    eye = np.eye(n)
    parts = []
    for i in range(n):
        c = mv.contract_dense(n, k, np.broadcast_to(eye[i], (len(A), n)), A.coeffs)
        parts.append(_append_marker(A, eye[i], coeffs=c))
    return DiffChain(n, k - 1, *(np.concatenate(x) for x in zip(*parts)))


def perp(A: DiffChain) -> DiffChain:
    return A._replace(grade=A.dim - A.grade, coeffs=mv.hodge_dense(A.dim, A.grade, A.coeffs),
                      canonical=True)


def diamond(A: DiffChain) -> DiffChain:
    """◇ = ⊥∂⊥, raising grade by one."""
    if A.grade >= A.dim:
        raise ValueError("diamond needs grade < dimension")
    return perp(boundary(perp(A)))


def box(A: DiffChain) -> DiffChain:
    """□ = ◇∂ + ∂◇; a summand whose grade is out of range contributes zero."""
    out = DiffChain(A.dim, A.grade)
    if A.grade >= 1:
        out = out + diamond(boundary(A))
    if A.grade < A.dim:
        out = out + boundary(diamond(A))
    return out


def lambda_k(J: np.ndarray, k: int) -> np.ndarray:
    """k-th exterior power of Jacobians J (N, m, n) in blade bases: (N, C(m,k), C(n,k))."""
    N, m, n = J.shape
    out_bl, in_bl = mv.blades(m, k), mv.blades(n, k)
    if k == 0:
        return np.ones((N, 1, 1))
    M = np.empty((N, len(out_bl), len(in_bl)))
    for a, rb in enumerate(out_bl):
        sub = J[:, list(rb), :]
        for b, cb in enumerate(in_bl):
            M[:, a, b] = np.linalg.det(sub[:, :, list(cb)])
    return M


def pushforward(F: SmoothMap, A: DiffChain) -> DiffChain:
    """(p; α) ↦ (F(p); Λ^k DF_p α); marker-bearing terms are rejected."""
    if not A.marker_free:
        raise ValueError("pushforward of marker-bearing terms is not supported")
    if F.dim_in != A.dim:
        raise ValueError("map dimension mismatch")
    if A.grade > F.dim_out:
        raise ValueError("grade exceeds target dimension")
    if len(A) == 0:
        return DiffChain(F.dim_out, A.grade)
    q = F.value(A.points)
    M = lambda_k(F.jacobian(A.points), A.grade)
    return DiffChain(F.dim_out, A.grade, q, np.einsum("nab,nb->na", M, A.coeffs))


def support(A: DiffChain) -> set:
    return {tuple(p) for p in A.points}


def mass_upper(A: DiffChain) -> float:
    """Σ mass_upper(α_i) over canonical terms (markers ignored)."""
    return float(mv.mass_upper_dense(A.dim, A.grade, A.coeffs).sum())
