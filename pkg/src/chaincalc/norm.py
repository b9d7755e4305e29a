"""Upper and lower bounds on B^r norms of chains.

Upper bounds come from decomposition certificates A = Σ Δ_{U_i}(p_i; α_i),
whose cost Σ ‖u_1‖...‖u_j‖ mass(α_i) dominates ‖A‖_{B^r}.  Lower bounds come
from pairing with probe forms whose B^r norm is bounded by a declared value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import multivector as mv
from .chain import DEPTH_DTYPE, DiffChain
from .form import FormSpec, evaluate

PAIR_CUTOFF = 2.0
MAX_ROUNDS = 64
CHUNK_ROWS = 1 << 20


@dataclass(frozen=True, eq=False)
class DecompositionCertificate:
    """Generators Δ_{U_i}(p_i; α_i) stored column-wise.

    ``steps`` has shape (M, J, n) with rows zero-padded past ``depth``.
    """

    r: int
    dim: int
    grade: int
    points: np.ndarray
    steps: np.ndarray
    depth: np.ndarray
    alphas: np.ndarray
    method: str = ""

    def __len__(self):
        return self.points.shape[0]

    @property
    def size(self) -> int:
        return len(self)

    def generator_costs(self) -> np.ndarray:
        lengths = np.linalg.norm(self.steps, axis=2) if self.steps.shape[1] else np.ones((len(self), 0))
        J = self.steps.shape[1]
        active = np.arange(J)[None, :] < self.depth[:, None]
        factor = np.prod(np.where(active, lengths, 1.0), axis=1)
        return factor * mv.mass_upper_dense(self.dim, self.grade, self.alphas)

    @property
    def cost(self) -> float:
        return math.fsum(self.generator_costs()) if len(self) else 0.0

    def generators(self) -> list:
        out = []
        for i in range(len(self)):
            U = [tuple(u) for u in self.steps[i, :self.depth[i]]]
            out.append((tuple(self.points[i]), mv.KVector.from_array(self.dim, self.grade, self.alphas[i]), U))
        return out

    def expand(self) -> DiffChain:
        pts, cos = [], []
        for j in np.unique(self.depth):
            rows = np.flatnonzero(self.depth == j)
            p, U, a = self.points[rows], self.steps[rows, :j], self.alphas[rows]
            for mask in range(1 << j):
                shift = np.zeros_like(p)
                size = 0
                for m in range(j):
                    if mask >> m & 1:
                        shift = shift + U[:, m]
                        size += 1
                pts.append(p + shift)
                cos.append((-1.0 if (j - size) % 2 else 1.0) * a)
        if not pts:
            return DiffChain(self.dim, self.grade)
        return DiffChain(self.dim, self.grade, np.concatenate(pts), np.concatenate(cos))

    def verify(self, A: DiffChain, atol: float = 0.0) -> bool:
        """Witness check: the generators expand to A (exactly when atol = 0)."""
        D = self.expand() - A
        return len(D) == 0 or float(np.abs(D.coeffs).max()) <= atol


def _empty_cert(A: DiffChain, r: int, method: str) -> DecompositionCertificate:
    n = A.dim
    return DecompositionCertificate(r, n, A.grade, np.zeros((0, n)), np.zeros((0, 0, n)),
                                    np.zeros(0, dtype=DEPTH_DTYPE), np.zeros((0, mv.nblades(n, A.grade))), method)


def _require_marker_free(A: DiffChain):
    if not A.marker_free:
        raise ValueError("marker-bearing terms have no finite order-r certificate; use probes")


def certify_trivial(A: DiffChain, r: int = 0) -> DecompositionCertificate:
    """Every term as its own generator with j = 0: cost Σ mass_upper(α_i)."""
    _require_marker_free(A)
    n = A.dim
    return DecompositionCertificate(r, n, A.grade, A.points.copy(), np.zeros((len(A), 0, n)),
                                    np.zeros(len(A), dtype=DEPTH_DTYPE), A.coeffs.copy(), "trivial")


# ---------------------------------------------------------------------------
# greedy nearest-opposite matching


def _match(P, a, Q, b, cutoff, admissible):
    """Move mass from atoms (P, a) to nearest atoms (Q, b) within cutoff.

    Returns transfer arrays (i_pos, i_neg, t) and residual masses.  Each
    round every live positive atom picks its nearest live negative atom;
    capacities are shared out in order of distance.  ``admissible(ip, iq)``
    vetoes pairs whose witness would not be exact.
    """
    a, b = a.copy(), b.copy()
    out_p, out_q, out_t = [], [], []
    blocked = np.zeros(len(a), dtype=bool)
    for _ in range(MAX_ROUNDS):
        live_p = np.flatnonzero((a > 0) & ~blocked)
        live_q = np.flatnonzero(b > 0)
        if not len(live_p) or not len(live_q):
            break
        tree = cKDTree(Q[live_q])
        dist, idx = tree.query(P[live_p], k=1, distance_upper_bound=cutoff)
        found = np.isfinite(dist) & (dist < cutoff)
        if not found.any():
            break
        ip = live_p[found]
        iq = live_q[idx[found]]
        dist = dist[found]
        ok = admissible(ip, iq)
        blocked[ip[~ok]] = True
        ip, iq, dist = ip[ok], iq[ok], dist[ok]
        if not len(ip):
            continue
        order = np.lexsort((ip, dist, iq))
        ip, iq = ip[order], iq[order]
        mass = a[ip]
        new = np.ones(len(iq), dtype=bool)
        new[1:] = iq[1:] != iq[:-1]
        starts = np.flatnonzero(new)
        gid = np.cumsum(new) - 1
        cs = np.cumsum(mass)
        before = cs - mass - (cs[starts] - mass[starts])[gid]
        t = np.clip(b[iq] - before, 0.0, mass)
        moved = t > 0
        if not moved.any():
            break
        ip, iq, t = ip[moved], iq[moved], t[moved]
        out_p.append(ip)
        out_q.append(iq)
        out_t.append(t)
        a[ip] -= t
        np.subtract.at(b, iq, t)
        b[b < 0] = 0.0
    tree = None
    if out_p:
        return np.concatenate(out_p), np.concatenate(out_q), np.concatenate(out_t), a, b
    e = np.zeros(0, dtype=np.intp)
    return e, e, np.zeros(0), a, b


def _subset_sums(U: np.ndarray):
    """Σ_{m in S} U[:, m] for every subset S, summed in increasing m."""
    j = U.shape[1]
    sums = []
    for mask in range(1 << j):
        s = np.zeros((U.shape[0], U.shape[2]))
        for m in range(j):
            if mask >> m & 1:
                s = s + U[:, m]
        sums.append(s)
    return sums


def _pair_level(base, U, scal, cutoff):
    """One level of matching among generators sharing identical steps U.

    base (M, n), U (M, j, n) identical within the group, scal (M,) signed
    scalars.  Returns new generators (base, U + [v], scal) and leftovers.
    """
    pos, neg = np.flatnonzero(scal > 0), np.flatnonzero(scal < 0)
    j = U.shape[1]
    if not len(pos) or not len(neg):
        return None
    # query from the larger side
    if len(pos) >= len(neg):
        big, small, sgn_big = pos, neg, 1.0
    else:
        big, small, sgn_big = neg, pos, -1.0
    sub = _subset_sums(U[:1])  # U identical inside the group

    def admissible(ib, iq):
        ok = np.ones(len(ib), dtype=bool)
        for lo in range(0, len(ib), CHUNK_ROWS):
            sl = slice(lo, lo + CHUNK_ROWS)
            P, Q = base[big[ib[sl]]], base[small[iq[sl]]]
            v = P - Q
            for s in sub:
                ok[sl] &= np.all(Q + (s + v) == P + s, axis=1)
        return ok

    ib, iq, t, rb, rs = _match(base[big], np.abs(scal[big]), base[small], np.abs(scal[small]),
                               cutoff, admissible)
    if not len(t):
        return None
    Q = base[small[iq]]
    v = base[big[ib]]
    np.subtract(v, Q, out=v)
    del ib
    newU = v[:, None, :] if j == 0 else np.concatenate([U[small[iq]], v[:, None, :]], axis=1)
    # big-side atom at P with sign s, small-side atom at Q with sign −s: Δ_v(Q; s t ...)
    new = (Q, newU, sgn_big * t)
    left_scal = scal.copy()
    left_scal[big] = sgn_big * rb
    left_scal[small] = -sgn_big * rs
    return new, left_scal


def _orient(base, u, scal):
    """Δ_u(q; s) = Δ_{−u}(q+u; −s): flip so the first nonzero entry of u is positive,
    but only where q + u + (−u) reproduces q exactly."""
    nz = u != 0
    first = np.argmax(nz, axis=1)
    neg = u[np.arange(len(u)), first] < 0
    q2 = base + u
    ok = np.all(q2 + (-u) == base, axis=1)
    flip = neg & ok
    base = np.where(flip[:, None], q2, base)
    u = np.where(flip[:, None], -u, u)
    scal = np.where(flip, -scal, scal)
    return base, u, scal


def _cat(arrays):
    return arrays[0] if len(arrays) == 1 else np.concatenate(arrays)


def certify_pairing(A: DiffChain, r: int = 1, cutoff: float = PAIR_CUTOFF) -> DecompositionCertificate:
    """Greedy certificate: opposite-sign terms within ``cutoff`` are paired into
    Δ_u generators, then (for r ≥ 2) equal-step generators are paired again
    into Δ_v Δ_u generators, and so on up to order r.  Returns the cheaper of
    this and the trivial certificate.
    """
    _require_marker_free(A)
    if r < 1:
        raise ValueError("pairing needs r >= 1")
    n, k = A.dim, A.grade
    B = mv.nblades(n, k)
    gens = {"base": [], "U": [], "blade": [], "scal": []}

    def emit(base, U, blade, scal):
        keep = scal != 0
        if not keep.all():
            base, U, scal = base[keep], U[keep], scal[keep]
        if len(scal):
            gens["base"].append(base)
            gens["U"].append(U)
            gens["blade"].append(np.full(len(scal), blade, dtype=np.int16))
            gens["scal"].append(scal)

    for blade in range(B):
        c = A.coeffs[:, blade]
        rows = np.flatnonzero(c != 0)
        if not len(rows):
            continue
        base, scal = A.points[rows], c[rows]
        U = np.zeros((len(rows), 0, n))
        # level j: groups of generators with identical steps
        groups = [(base, U, scal)]
        for level in range(r):
            next_groups = []
            for gb, gU, gs in groups:
                res = _pair_level(gb, gU, gs, cutoff)
                if res is None:
                    emit(gb, gU, blade, gs)
                    continue
                (nb, nU, ns), left = res
                emit(gb, gU, blade, left)
                del gb, gU, gs, left
                if level < r - 1:
                    nb, v, ns = _orient(nb, nU[:, -1], ns)
                    nU = np.concatenate([nU[:, :-1], v[:, None, :]], axis=1)
                next_groups.append((nb, nU, ns))
            groups = None
            if level == r - 1:
                for gb, gU, gs in next_groups:
                    emit(gb, gU, blade, gs)
                break
            # regroup by exact step tuple
            groups = []
            for gb, gU, gs in next_groups:
                key = gU.reshape(len(gU), -1)
                order = np.lexsort(key.T[::-1])
                key, gb, gU, gs = key[order], gb[order], gU[order], gs[order]
                new = np.ones(len(key), dtype=bool)
                new[1:] = (key[1:] != key[:-1]).any(axis=1)
                bounds = np.append(np.flatnonzero(new), len(key))
                for s, e in zip(bounds[:-1], bounds[1:]):
                    groups.append((gb[s:e], gU[s:e], gs[s:e]))
            if not groups:
                break

    if not gens["base"]:
        return _empty_cert(A, r, "pairing")
    J = max(u.shape[1] for u in gens["U"])
    depth = np.concatenate([np.full(len(u), u.shape[1], dtype=DEPTH_DTYPE) for u in gens["U"]])
    steps = _cat([u if u.shape[1] == J else np.concatenate([u, np.zeros((len(u), J - u.shape[1], n))], axis=1)
                  for u in gens.pop("U")])
    points = _cat(gens.pop("base"))
    if B == 1:
        alphas = _cat(gens.pop("scal"))[:, None]
    else:
        blades = np.concatenate(gens["blade"])
        alphas = np.zeros((len(blades), B))
        alphas[np.arange(len(blades)), blades] = np.concatenate(gens["scal"])
    cert = DecompositionCertificate(r, n, k, points, steps, depth, alphas, "pairing")
    trivial_cost = math.fsum(mv.mass_upper_dense(n, k, A.coeffs))
    return cert if cert.cost <= trivial_cost else certify_trivial(A, r)


def certify_telescoping(p, v, alpha: mv.KVector, i: int, j: int = 1):
    """Certificate for Δ_{2^{-i}v}(p; 2^i α) − Δ_{2^{-(i+j)}v}(p; 2^{i+j} α).

    With h = 2^{-(i+j)} v the difference equals Σ_{m=1}^{2^j} Δ_{(m−1)h} Δ_h (p; 2^i α),
    of cost ≤ 2^{-i} ‖v‖² mass(α).  Returns (chain, certificate).
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    n = len(p)
    a = alpha.to_array()
    h = v * 2.0 ** (-(i + j))
    from .chain import difference
    A = (difference([v * 2.0 ** -i], DiffChain(n, alpha.grade, p, a * 2.0 ** i))
         - difference([h], DiffChain(n, alpha.grade, p, a * 2.0 ** (i + j))))
    M = 2 ** j
    ms = np.arange(1, M)  # m = 1 gives Δ_0 = 0
    steps = np.stack([np.broadcast_to(h, (len(ms), n)), ms[:, None] * h], axis=1)
    cert = DecompositionCertificate(2, n, alpha.grade, np.broadcast_to(p, (len(ms), n)).copy(), steps,
                                    np.full(len(ms), 2, dtype=DEPTH_DTYPE),
                                    np.broadcast_to(a * 2.0 ** i, (len(ms), len(a))).copy(), "telescoping")
    return A, cert


def best_certificate(A: DiffChain, r: int) -> DecompositionCertificate:
    if r == 0:
        return certify_trivial(A, 0)
    return certify_pairing(A, r)


# ---------------------------------------------------------------------------
# dual bounds


def declared_bound(omega: FormSpec, r: int) -> float:
    """Smallest declared bound valid at order r (‖ω‖_{B^r} ≤ ‖ω‖_{B^s} for s ≥ r)."""
    valid = [v for s, v in omega.declared_norm_bounds.items() if s >= r]
    if not valid:
        raise ValueError(f"probe {omega.name or omega!r} has no declared bound at order {r}")
    return min(valid)


def lower_bound_dual(A: DiffChain, r: int, probes: Sequence[FormSpec]) -> float:
    """max over probes of |∮_A ω| / ‖ω‖_{B^r} (declared)."""
    best = 0.0
    for omega in probes:
        bound = declared_bound(omega, r)
        if bound > 0:
            best = max(best, abs(evaluate(omega, A)) / bound)
    return best


@dataclass(frozen=True)
class NormBracket:
    lower: float
    upper: float
    certificate: DecompositionCertificate | None = None

    def __post_init__(self):
        if self.lower > self.upper * (1 + 1e-12) + 1e-300:
            raise AssertionError(f"bracket inverted: lower {self.lower} > upper {self.upper}")


def bracket(A: DiffChain, r: int, probes: Sequence[FormSpec]) -> NormBracket:
    lower = lower_bound_dual(A, r, probes)
    if not A.marker_free:
        return NormBracket(lower, math.inf, None)
    cert = best_certificate(A, r)
    return NormBracket(lower, cert.cost, cert)
