"""Chains for classical domains: dyadic cubes, Whitney decompositions of open
sets, polyhedral chains, curves, the Koch snowflake and cones.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import multivector as mv
from .chain import DiffChain
from .norm import DecompositionCertificate, certify_pairing


# ---------------------------------------------------------------------------
# dyadic cubes


def _grid_points(lo: np.ndarray, step: float, m: int) -> np.ndarray:
    """Centres lo + (i + 1/2)·step of an m^n grid, in lexicographic order."""
    n = len(lo)
    g = (np.arange(m) + 0.5) * step
    P = np.empty((m ** n, n))
    for a in range(n):
        col = np.repeat(g, m ** (n - 1 - a))
        P[:, a] = np.tile(col, m ** a) + lo[a]
    return P


def _cube_args(center, side, dim):
    if center is None:
        center = np.full(dim or 2, 0.5)
    center = np.asarray(center, dtype=float).reshape(-1)
    if side <= 0:
        raise ValueError("side must be positive")
    return center, float(side)


def cube_chain(center=None, side: float = 1.0, level: int = 0, dim: int | None = None) -> DiffChain:
    """k-th binary Riemann chain of the cube: 2^{nk} terms (centre; vol·e_{1..n})."""
    if level < 0:
        raise ValueError("level must be >= 0")
    center, side = _cube_args(center, side, dim)
    n, m = len(center), 1 << level
    P = _grid_points(center - side / 2, side / m, m)
    c = np.full((len(P), 1), (side / m) ** n)
    return DiffChain(n, n, P, c, canonical=True)


def cube_difference(center=None, side: float = 1.0, level: int = 1,
                    dim: int | None = None) -> DiffChain:
    """cube_chain(level) − cube_chain(level − 1), assembled without a generic sort.

    The two grids are disjoint, so the result is the union of both point sets
    ordered by their integer coordinates on the 2^{level+1} half-grid.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    center, side = _cube_args(center, side, dim)
    n = len(center)
    lo = center - side / 2
    fine, coarse = 1 << level, 1 << (level - 1)
    P = np.concatenate([_grid_points(lo, side / fine, fine), _grid_points(lo, side / coarse, coarse)])
    c = np.concatenate([np.full(fine ** n, (side / fine) ** n), np.full(coarse ** n, -(side / coarse) ** n)])
    # integer half-grid coordinates: odd for the fine grid, 2 mod 4 for the coarse one
    M = 2 * fine
    fi = 2 * np.indices((fine,) * n).reshape(n, -1).T + 1
    ci = 4 * np.indices((coarse,) * n).reshape(n, -1).T + 2
    idx = np.concatenate([fi, ci]).astype(np.int64)
    key = np.zeros(len(idx), dtype=np.int64)
    for a in range(n):
        key = key * M + idx[:, a]
    del idx, fi, ci
    order = np.argsort(key, kind="stable")
    del key
    return DiffChain(n, n, P[order], c[order, None], canonical=True)


def cube_error_bound(n: int, level: int, side: float = 1.0) -> float:
    """Cost of the pairing certificate for cube_chain(level) − cube_chain(level − 1)."""
    return math.sqrt(n) * side * 2.0 ** -(level + 1)


@dataclass(frozen=True)
class ChainApproximant:
    """A sequence of chains together with certified bounds on consecutive gaps."""

    generator: Callable[[int], DiffChain]
    error_bound: Callable[[int], float]
    name: str = ""
    difference: Optional[Callable[[int], DiffChain]] = None

    def at(self, level: int) -> DiffChain:
        return self.generator(level)

    def gap(self, level: int) -> DiffChain:
        if self.difference is not None:
            return self.difference(level)
        return self.generator(level) - self.generator(level - 1)

    def certify(self, level: int, r: int = 1) -> DecompositionCertificate:
        return certify_pairing(self.gap(level), r)

    def tail_bound(self, level: int, terms: int = 64) -> float:
        """Σ_{l > level} error_bound(l), truncated once terms stop mattering."""
        return math.fsum(self.error_bound(level + i) for i in range(1, terms + 1))


def cube_approximant(center=None, side: float = 1.0, dim: int | None = None) -> ChainApproximant:
    center, side = _cube_args(center, side, dim)
    n = len(center)
    return ChainApproximant(lambda k: cube_chain(center, side, k),
                            lambda k: cube_error_bound(n, k, side),
                            name=f"cube{n}",
                            difference=lambda k: cube_difference(center, side, k))


# ---------------------------------------------------------------------------
# Whitney decompositions


@dataclass(frozen=True)
class SetOracle:
    """Bounded open set given by a membership test and the distance to its boundary.

    ``contains_cube(lo, side)`` is an optional exact test that whole cubes lie in
    the set; without it a ball test around the cube centre is used.
    """

    dim: int
    contains: Callable[[np.ndarray], np.ndarray]
    distance: Callable[[np.ndarray], np.ndarray]
    bbox: tuple
    contains_cube: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    area: Optional[float] = None
    name: str = ""

    def signed_distance(self, x: np.ndarray) -> np.ndarray:
        d = np.abs(self.distance(x))
        return np.where(self.contains(x), d, -d)


def disk(center=(0.0, 0.0), radius: float = 1.0) -> SetOracle:
    c = np.asarray(center, dtype=float)

    def far_corner(lo, side):
        far = np.maximum(np.abs(lo - c), np.abs(lo + side - c))
        return np.linalg.norm(far, axis=1)

    return SetOracle(
        dim=len(c),
        contains=lambda x: np.linalg.norm(x - c, axis=1) < radius,
        distance=lambda x: np.abs(radius - np.linalg.norm(x - c, axis=1)),
        bbox=(c - radius, c + radius),
        contains_cube=lambda lo, side: far_corner(lo, side) < radius,
        area=math.pi * radius ** 2 if len(c) == 2 else None,
        name="disk",
    )


def annulus(center=(0.0, 0.0), inner: float = 0.5, outer: float = 1.0) -> SetOracle:
    if not 0 <= inner < outer:
        raise ValueError("need 0 <= inner < outer")
    c = np.asarray(center, dtype=float)

    def inside(lo, side):
        far = np.maximum(np.abs(lo - c), np.abs(lo + side - c))
        near = np.clip(c, lo, lo + side) - c
        return (np.linalg.norm(far, axis=1) < outer) & (np.linalg.norm(near, axis=1) > inner)

    def dist(x):
        r = np.linalg.norm(x - c, axis=1)
        return np.minimum(np.abs(r - inner), np.abs(outer - r))

    def member(x):
        r = np.linalg.norm(x - c, axis=1)
        return (r > inner) & (r < outer)

    return SetOracle(len(c), member, dist, (c - outer, c + outer), inside,
                     math.pi * (outer ** 2 - inner ** 2) if len(c) == 2 else None, "annulus")


def box_set(lo, hi) -> SetOracle:
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)

    def dist(x):
        return np.min(np.minimum(np.abs(x - lo), np.abs(hi - x)), axis=1)

    return SetOracle(
        dim=len(lo),
        contains=lambda x: np.all((x > lo) & (x < hi), axis=1),
        distance=dist,
        bbox=(lo, hi),
        contains_cube=lambda q, side: np.all((q >= lo) & (q + side <= hi), axis=1),
        area=float(np.prod(hi - lo)),
        name="box",
    )


def whitney_cubes(U: SetOracle, level: int, max_cubes: int = 5_000_000):
    """Dyadic cubes (lower corners, level) of a Whitney-type decomposition.

    Descending from the coarsest dyadic grid covering the bounding box, a cube
    of diameter d is accepted when its distance to the boundary is at least d,
    discarded when it lies outside the set and split otherwise.  Cubes at the
    finest level (side 2^{−level}) are kept when they lie inside the set.
    """
    lo, hi = (np.asarray(b, dtype=float) for b in U.bbox)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("set must be bounded")
    n = U.dim
    ext = float(np.max(hi - lo))
    L0 = min(level, int(math.floor(-math.log2(ext))) if ext > 0 else level)
    s = 2.0 ** -L0
    i0, i1 = np.floor(lo / s).astype(np.int64), np.ceil(hi / s).astype(np.int64)
    grid = np.stack(np.meshgrid(*[np.arange(a, b) for a, b in zip(i0, i1)], indexing="ij"), -1)
    corners = grid.reshape(-1, n).astype(float) * s
    out = []
    total = 0
    for L in range(L0, level + 1):
        s = 2.0 ** -L
        diam = s * math.sqrt(n)
        sd = U.signed_distance(corners + s / 2)
        inside_ball = sd >= diam / 2
        if L == level:
            inside = U.contains_cube(corners, s) if U.contains_cube is not None else inside_ball
            out.append((corners[inside], L))
            break
        accept = sd - diam / 2 >= diam
        out.append((corners[accept], L))
        total += int(accept.sum())
        split = ~accept & (sd > -diam / 2)
        parents = corners[split]
        if total + len(parents) * 2 ** n > max_cubes:
            raise ValueError("cube budget exceeded")
        offs = np.array(list(itertools.product((0.0, 0.5), repeat=n))) * s
        corners = (parents[:, None, :] + offs[None]).reshape(-1, n)
    return out


def whitney_chain(U: SetOracle, level: int, max_cubes: int = 5_000_000) -> DiffChain:
    """One term (centre; volume·e_{1..n}) per Whitney cube, all oriented alike."""
    n = U.dim
    pts, cs = [], []
    for corners, L in whitney_cubes(U, level, max_cubes):
        s = 2.0 ** -L
        pts.append(corners + s / 2)
        cs.append(np.full(len(corners), s ** n))
    return DiffChain(n, n, np.concatenate(pts), np.concatenate(cs)[:, None])


# ---------------------------------------------------------------------------
# polyhedral chains


def _perm_parity(order: np.ndarray) -> np.ndarray:
    """Sign of each row permutation."""
    M, m = order.shape
    sign = np.ones(M)
    for i in range(m):
        for j in range(i + 1, m):
            sign = np.where(order[:, i] > order[:, j], -sign, sign)
    return sign


def simplex_vectors(vertices: np.ndarray) -> np.ndarray:
    """(1/k!)(v1−v0)∧…∧(vk−v0) as blade coefficients, for vertices (M, k+1, n)."""
    M, kp1, n = vertices.shape
    k = kp1 - 1
    if k == 0:
        return np.ones((M, 1))
    E = vertices[:, 1:, :] - vertices[:, :1, :]
    out = np.empty((M, mv.nblades(n, k)))
    for b, I in enumerate(mv.blades(n, k)):
        out[:, b] = np.linalg.det(E[:, :, list(I)])
    return out / math.factorial(k)


class PolyhedralChain:
    """Weighted oriented k-simplices in R^n.

    Canonical form orders each cell's vertices lexicographically (absorbing the
    permutation sign into the weight), merges identical cells and drops zero
    weights and cells of zero volume.
    """

    __slots__ = ("dim", "grade", "weights", "vertices")

    def __init__(self, dim: int, grade: int, weights=None, vertices=None, *, drop_degenerate: bool = True):
        if dim < 1 or not 0 <= grade <= dim:
            raise ValueError(f"invalid dimension/grade ({dim}, {grade})")
        V = np.zeros((0, grade + 1, dim)) if vertices is None else np.asarray(vertices, dtype=float)
        V = V.reshape(-1, grade + 1, dim)
        w = np.ones(len(V)) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
        if len(w) != len(V):
            raise ValueError("one weight per cell")
        if len(V):
            # lexicographic vertex order inside each cell
            order = np.zeros((len(V), grade + 1), dtype=np.int64)
            order[:] = np.arange(grade + 1)
            for a in range(dim - 1, -1, -1):
                key = np.take_along_axis(V[:, :, a], order, axis=1)
                order = np.take_along_axis(order, np.argsort(key, axis=1, kind="stable"), axis=1)
            V = np.take_along_axis(V, order[:, :, None], axis=1)
            w = w * _perm_parity(order)
            keep = w != 0
            if drop_degenerate and grade > 0:
                keep &= (simplex_vectors(V) != 0).any(axis=1)
            V, w = V[keep], w[keep]
            flat = V.reshape(len(V), -1)
            o = np.lexsort(flat.T[::-1])
            flat, V, w = flat[o], V[o], w[o]
            if len(V):
                new = np.ones(len(V), dtype=bool)
                new[1:] = (flat[1:] != flat[:-1]).any(axis=1)
                starts = np.flatnonzero(new)
                w = np.add.reduceat(w, starts)
                V = V[starts]
                V, w = V[w != 0], w[w != 0]
        V.flags.writeable = False
        w.flags.writeable = False
        self.dim, self.grade, self.weights, self.vertices = dim, grade, w, V

    @classmethod
    def simplex(cls, vertices, weight: float = 1.0) -> "PolyhedralChain":
        V = np.asarray(vertices, dtype=float)
        return cls(V.shape[1], V.shape[0] - 1, [weight], V[None])

    @classmethod
    def polygon(cls, vertices, closed: bool = True) -> "PolyhedralChain":
        V = np.asarray(vertices, dtype=float)
        W = np.roll(V, -1, axis=0) if closed else V[1:]
        A = V if closed else V[:-1]
        return cls(V.shape[1], 1, np.ones(len(A)), np.stack([A, W], axis=1))

    def __len__(self):
        return len(self.weights)

    def cells(self) -> list:
        return [(float(w), [tuple(float(x) for x in v) for v in V]) for w, V in zip(self.weights, self.vertices)]

    def _check(self, other):
        if (self.dim, self.grade) != (other.dim, other.grade):
            raise ValueError("dimension/grade mismatch")

    def __add__(self, other):
        self._check(other)
        return PolyhedralChain(self.dim, self.grade, np.concatenate([self.weights, other.weights]),
                               np.concatenate([self.vertices, other.vertices]))

    def __neg__(self):
        return PolyhedralChain(self.dim, self.grade, -self.weights, self.vertices)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, s: float):
        return PolyhedralChain(self.dim, self.grade, float(s) * self.weights, self.vertices)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PolyhedralChain):
            return NotImplemented
        return ((self.dim, self.grade) == (other.dim, other.grade)
                and np.array_equal(self.weights, other.weights)
                and np.array_equal(self.vertices, other.vertices))

    __hash__ = None

    def is_zero(self) -> bool:
        return len(self) == 0

    def volumes(self) -> np.ndarray:
        if self.grade == 0:
            return np.ones(len(self))
        return np.linalg.norm(simplex_vectors(self.vertices), axis=1)

    def mass(self) -> float:
        return math.fsum(np.abs(self.weights) * self.volumes())

    def to_json(self) -> dict:
        return {"dim": self.dim, "grade": self.grade,
                "cells": [{"weight": w, "vertices": [list(v) for v in V]} for w, V in self.cells()]}

    @classmethod
    def from_json(cls, obj: dict) -> "PolyhedralChain":
        cells = obj["cells"]
        V = np.array([c["vertices"] for c in cells], dtype=float).reshape(-1, obj["grade"] + 1, obj["dim"])
        return cls(obj["dim"], obj["grade"], [c["weight"] for c in cells], V)

    def __repr__(self):
        return f"PolyhedralChain(dim={self.dim}, grade={self.grade}, cells={len(self)})"


def polyhedral_boundary(P: PolyhedralChain) -> PolyhedralChain:
    """Σ_i (−1)^i w·[v0 … v̂i … vk]."""
    if P.grade == 0:
        raise ValueError("a 0-chain has no boundary")
    k = P.grade
    W, V = [], []
    for i in range(k + 1):
        idx = [j for j in range(k + 1) if j != i]
        W.append((-1) ** i * P.weights)
        V.append(P.vertices[:, idx, :])
    return PolyhedralChain(P.dim, k - 1, np.concatenate(W), np.concatenate(V))


def _kuhn_pieces(k: int, level: int) -> np.ndarray:
    """Freudenthal subdivision of {1 ≥ t1 ≥ … ≥ tk ≥ 0} into 2^{k·level} simplices.

    Returns positively oriented vertex arrays (M, k+1, k) in t-coordinates.
    """
    m = 1 << level
    if k == 0:
        return np.zeros((1, 1, 0))
    corners = np.indices((m,) * k).reshape(k, -1).T.astype(float)
    pieces = []
    for perm in itertools.permutations(range(k)):
        steps = np.zeros((k + 1, k))
        for s, a in enumerate(perm):
            steps[s + 1:, a] += 1.0
        V = (corners[:, None, :] + steps[None]) / m
        c = V.mean(axis=1)
        ok = np.all(c[:, :-1] > c[:, 1:], axis=1) & (c[:, 0] < 1) & (c[:, -1] > 0)
        pieces.append(V[ok])
    V = np.concatenate(pieces)
    if k >= 1:
        det = np.linalg.det(V[:, 1:, :] - V[:, :1, :])
        neg = det < 0
        if k >= 2:
            V[neg, k - 1], V[neg, k] = V[neg, k].copy(), V[neg, k - 1].copy()
    return V


def _refine(vertices: np.ndarray, level: int) -> tuple:
    """Refine cells (M, k+1, n) into (M·2^{k·level}, k+1, n) with the same orientation."""
    M, kp1, n = vertices.shape
    k = kp1 - 1
    if k == 0 or level == 0:
        return vertices, np.arange(M)
    T = _kuhn_pieces(k, level)                       # (S, k+1, k)
    E = vertices[:, 1:, :] - vertices[:, :-1, :]     # (M, k, n): v_i − v_{i−1}
    out = vertices[:, None, None, 0, :] + np.einsum("sjk,mkn->msjn", T, E)
    return out.reshape(-1, kp1, n), np.repeat(np.arange(M), len(T))


def simplex_chain(vertices, level: int = 0, weight: float = 1.0) -> DiffChain:
    """Refine a k-simplex and replace each piece by (barycentre; its k-vector)."""
    V = np.asarray(vertices, dtype=float)
    if V.ndim != 2:
        raise ValueError("vertices must be a (k+1, n) array")
    return polyhedral_to_pointed(PolyhedralChain(V.shape[1], V.shape[0] - 1, [weight], V[None],
                                                 drop_degenerate=False), level)


def polyhedral_to_pointed(P: PolyhedralChain, level: int = 0) -> DiffChain:
    if level < 0:
        raise ValueError("level must be >= 0")
    if len(P) == 0:
        return DiffChain(P.dim, P.grade)
    V, owner = _refine(P.vertices, level)
    coeffs = simplex_vectors(V) * P.weights[owner, None]
    return DiffChain(P.dim, P.grade, V.mean(axis=1), coeffs)


# ---------------------------------------------------------------------------
# curves


def _sample_curve(gamma: Callable, t: np.ndarray) -> np.ndarray:
    try:
        pts = np.asarray(gamma(t), dtype=float)
        if pts.ndim == 2 and pts.shape[0] == len(t):
            return pts
        if pts.ndim == 2 and pts.shape[1] == len(t):
            return pts.T.copy()
    except (TypeError, ValueError):
        pass
    return np.array([np.asarray(gamma(float(s)), dtype=float) for s in t])


def polyline_chain(pts: np.ndarray, weight: float = 1.0) -> DiffChain:
    """Σ (midpoint of chord; chord) over consecutive points."""
    pts = np.asarray(pts, dtype=float)
    a, b = pts[:-1], pts[1:]
    return DiffChain(pts.shape[1], 1, (a + b) / 2, weight * (b - a))


def curve_points(gamma: Callable, N: int, t0: float = 0.0, t1: float = 1.0,
                 closed: bool = False) -> np.ndarray:
    if N < 1:
        raise ValueError("need N >= 1")
    pts = _sample_curve(gamma, np.linspace(t0, t1, N + 1))
    if closed:
        pts[-1] = pts[0]
    return pts


def curve_chain(gamma: Callable, N: int, t0: float = 0.0, t1: float = 1.0,
                closed: bool = False, weight: float = 1.0) -> DiffChain:
    """Midpoint-chord discretization of a parametrized path."""
    return polyline_chain(curve_points(gamma, N, t0, t1, closed), weight)


def curve_polyline(gamma: Callable, N: int, t0: float = 0.0, t1: float = 1.0,
                   closed: bool = False) -> PolyhedralChain:
    pts = curve_points(gamma, N, t0, t1, closed)
    return PolyhedralChain(pts.shape[1], 1, np.ones(N), np.stack([pts[:-1], pts[1:]], axis=1))


def circle(center=(0.0, 0.0), radius: float = 1.0, turns: int = 1) -> Callable:
    c = np.asarray(center, dtype=float)

    def gamma(t):
        a = 2 * np.pi * turns * np.asarray(t)
        return np.stack([c[0] + radius * np.cos(a), c[1] + radius * np.sin(a)], axis=-1)

    return gamma


def circle_chain(center=(0.0, 0.0), radius: float = 1.0, N: int = 1024, turns: int = 1) -> DiffChain:
    return curve_chain(circle(center, radius, turns), N, closed=True)


def subdivide_polygon(vertices, n_per_edge: int = 1, closed: bool = True) -> np.ndarray:
    """Polygon vertices with n_per_edge equal segments per edge; closed output repeats the first point."""
    V = np.asarray(vertices, dtype=float)
    if closed:
        V = np.concatenate([V, V[:1]])
    s = np.arange(n_per_edge) / n_per_edge
    a, b = V[:-1], V[1:]
    pts = (a[:, None, :] + s[None, :, None] * (b - a)[:, None, :]).reshape(-1, V.shape[1])
    return np.concatenate([pts, V[-1:]])


def polygon_chain(vertices, n_per_edge: int = 1, closed: bool = True, weight: float = 1.0) -> DiffChain:
    return polyline_chain(subdivide_polygon(vertices, n_per_edge, closed), weight)


def square_vertices(center=(0.0, 0.0), side: float = 1.0) -> np.ndarray:
    """Counter-clockwise corners of an axis-aligned square."""
    c, h = np.asarray(center, dtype=float), side / 2
    return c + h * np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


@dataclass(frozen=True)
class ClosedCurve:
    vertices: np.ndarray  # (m, 2) polygon corners, first point not repeated
    name: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def length(self) -> float:
        V = self.vertices
        return float(np.linalg.norm(np.roll(V, -1, axis=0) - V, axis=1).sum())

    @property
    def centroid(self) -> np.ndarray:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        x1, y1 = np.roll(x, -1), np.roll(y, -1)
        cr = x * y1 - x1 * y
        A = cr.sum() / 2
        return np.array([((x + x1) * cr).sum(), ((y + y1) * cr).sum()]) / (6 * A)

    def chain(self, n_per_edge: int = 1) -> DiffChain:
        return polygon_chain(self.vertices, n_per_edge)

    def polyline(self) -> PolyhedralChain:
        return PolyhedralChain.polygon(self.vertices)


def koch_boundary(level: int, side: float = 1.0) -> ClosedCurve:
    """Koch snowflake: counter-clockwise triangle with bumps on the outer side."""
    if level < 0:
        raise ValueError("level must be >= 0")
    ang = np.pi / 2 + 2 * np.pi * np.arange(3) / 3
    V = side / math.sqrt(3) * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    for _ in range(level):
        a = V
        d = np.roll(V, -1, axis=0) - a
        right = np.stack([d[:, 1], -d[:, 0]], axis=1)
        apex = a + d / 2 + right * (math.sqrt(3) / 6)
        V = np.stack([a, a + d / 3, apex, a + 2 * d / 3], axis=1).reshape(-1, 2)
    return ClosedCurve(V, f"koch{level}", {"level": level, "edges": len(V)})


# ---------------------------------------------------------------------------
# cones


def cone_at(z, P: PolyhedralChain, tol: float = 1e-12) -> PolyhedralChain:
    """Σ w_i·[z, a_i, b_i] over the edges of a closed polyhedral 1-chain."""
    z = np.asarray(z, dtype=float)
    if P.grade != 1:
        raise ValueError("cone_at needs a 1-chain")
    if not polyhedral_boundary(P).is_zero():
        raise ValueError("chain is not closed")
    a, b = P.vertices[:, 0], P.vertices[:, 1]
    ab = b - a
    s = np.clip(np.einsum("ij,ij->i", z - a, ab) / np.einsum("ij,ij->i", ab, ab), 0, 1)
    if np.any(np.linalg.norm(a + s[:, None] * ab - z, axis=1) <= tol):
        raise ValueError("cone point lies on an edge")
    V = np.stack([np.broadcast_to(z, a.shape), a, b], axis=1)
    return PolyhedralChain(P.dim, 2, P.weights, V, drop_degenerate=False)
