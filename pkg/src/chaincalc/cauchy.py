"""Complex line integrals over 1-chains in R² ≅ C: Cauchy's theorem and formula,
winding numbers, residues, signed densities of polyhedral 2-chains and the
closing construction for polygonal chains.

A grade-1 chain in R² pairs with f dz through the two real forms
u dx − v dy and v dx + u dy; on a pointed term (p; a e1 + b e2) this is
f(p)·(a + ib).  Marker-bearing terms P_{v1}…P_{vj}(p; α) pair with
f^{(j)}(p)·Π(v_m,1 + i v_m,2)·(a + ib).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .chain import DiffChain
from .domains import PolyhedralChain, circle_chain, polyhedral_boundary, simplex_vectors

CONTOUR_NODES = 16


def _to_complex(x) -> np.ndarray:
    x = np.asarray(x)
    if np.iscomplexobj(x) or x.ndim == 0:
        return x.astype(complex)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1 and x.shape[0] == 2:
        return np.array(x[0] + 1j * x[1])
    return x[..., 0] + 1j * x[..., 1]


@dataclass(frozen=True)
class HolomorphicSpec:
    """A complex function with optional analytic derivatives and declared poles.

    ``f`` maps complex arrays to complex arrays.  ``derivatives`` lists f', f'',
    ...; missing orders are computed by a small Cauchy-integral stencil.
    ``poles`` holds (location, exclusion radius) pairs.
    """

    f: Callable
    derivatives: tuple = ()
    poles: tuple = ()
    name: str = ""
    stencil_radius: float = 1e-2

    def __call__(self, z):
        return np.asarray(self.f(np.asarray(z, dtype=complex)), dtype=complex)

    @property
    def pole_array(self) -> tuple:
        if not self.poles:
            return np.zeros(0, dtype=complex), np.zeros(0)
        a = np.array([complex(*p[0]) if np.ndim(p[0]) else complex(p[0]) for p in self.poles])
        r = np.array([float(p[1]) for p in self.poles])
        return a, r

    def derivative(self, z, j: int = 1) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        if j == 0:
            return self(z)
        if j <= len(self.derivatives):
            return np.asarray(self.derivatives[j - 1](z), dtype=complex)
        r = self.stencil_radius
        a, _ = self.pole_array
        if len(a):
            d = np.abs(z.reshape(-1)[:, None] - a[None, :]).min(axis=1).reshape(z.shape)
            r = np.minimum(r, 0.5 * d)
        w = np.exp(2j * np.pi * np.arange(CONTOUR_NODES) / CONTOUR_NODES)
        vals = self(z[..., None] + np.asarray(r)[..., None] * w)
        return math.factorial(j) * (vals * w ** (-j)).mean(axis=-1) / np.asarray(r) ** j

    def cr_residual(self, points, h: float = 1e-5) -> np.ndarray:
        """|u_x − v_y| + |u_y + v_x| by central differences."""
        z = _to_complex(points)
        fx = (self(z + h) - self(z - h)) / (2 * h)
        fy = (self(z + 1j * h) - self(z - 1j * h)) / (2 * h)
        return np.abs(fx.real - fy.imag) + np.abs(fy.real + fx.imag)

    def validate(self, points, tol: float = 1e-6) -> float:
        z = _to_complex(points)
        a, r = self.pole_array
        if len(a):
            z = z[(np.abs(z[:, None] - a[None, :]) > r[None, :]).all(axis=1)]
        res = float(self.cr_residual(z).max()) if len(z) else 0.0
        if res > tol:
            raise ValueError(f"Cauchy-Riemann residual {res:.3g} exceeds {tol:g}")
        return res


def holomorphic(f: Callable, *derivatives: Callable, poles: Sequence = (), name: str = "") -> HolomorphicSpec:
    return HolomorphicSpec(f, tuple(derivatives), tuple(poles), name)


def _check_plane_chain(J: DiffChain):
    if J.dim != 2 or J.grade != 1:
        raise ValueError("need a grade-1 chain in R^2")


def _check_poles(f: HolomorphicSpec, J: DiffChain):
    a, r = f.pole_array
    if not len(a) or not len(J):
        return
    z = _to_complex(J.points)
    if (np.abs(z[:, None] - a[None, :]) <= r[None, :]).any():
        raise ValueError("chain support meets a declared pole disk")


def _marker_factor(J: DiffChain) -> np.ndarray:
    m = J.markers[..., 0] + 1j * J.markers[..., 1]
    slot = np.arange(J.markers.shape[1])[None, :] < J.depth[:, None]
    return np.where(slot, m, 1.0).prod(axis=1)


def _sum(values: np.ndarray) -> complex:
    return complex(math.fsum(values.real), math.fsum(values.imag))


def pair_terms(J: DiffChain, g: Callable[[np.ndarray, int], np.ndarray]) -> complex:
    """Σ g^{(j)}(p)·Π(markers)·(a + ib) with g(z, j) giving the j-th derivative."""
    _check_plane_chain(J)
    if not len(J):
        return 0j
    z = _to_complex(J.points)
    dz = J.coeffs[:, 0] + 1j * J.coeffs[:, 1]
    out = np.empty(len(J), dtype=complex)
    for j in np.unique(J.depth):
        rows = J.depth == j
        out[rows] = g(z[rows], int(j))
    if J.max_depth:
        out = out * _marker_factor(J)
    return _sum(out * dz)


def complex_pair(f: HolomorphicSpec, J: DiffChain) -> complex:
    """∮_J f dz = ∮_J (u dx − v dy) + i ∮_J (v dx + u dy)."""
    _check_plane_chain(J)
    _check_poles(f, J)
    return pair_terms(J, lambda z, j: f.derivative(z, j))


def _cauchy_kernel(z0: complex, weight: Callable | None = None):
    """(z, j) ↦ d^j/dz^j [w(z)/(z − z0)] for w ≡ 1 or a holomorphic spec."""
    def g(z, j):
        if weight is None:
            return (-1) ** j * math.factorial(j) / (z - z0) ** (j + 1)
        # Leibniz rule for w(z)·(z − z0)^{-1}
        out = np.zeros_like(z)
        for m in range(j + 1):
            out = out + math.comb(j, m) * weight.derivative(z, m) * \
                (-1) ** (j - m) * math.factorial(j - m) / (z - z0) ** (j - m + 1)
        return out
    return g


def segment_distance(J: DiffChain, z: complex) -> float:
    """Distance from z to the chords [p − α/2, p + α/2] of a 1-chain in R²."""
    p = _to_complex(J.points)
    d = J.coeffs[:, 0] + 1j * J.coeffs[:, 1]
    a = p - d / 2
    dd = np.abs(d) ** 2
    s = np.where(dd > 0, ((z - a) * d.conjugate()).real / np.where(dd > 0, dd, 1), 0.0)
    s = np.clip(s, 0.0, 1.0)
    return float(np.abs(a + s * d - z).min())


def chain_diameter(J: DiffChain) -> float:
    if not len(J):
        return 0.0
    return float(np.linalg.norm(J.points.max(axis=0) - J.points.min(axis=0)))


def _clearance(J: DiffChain, z: complex, eps: float | None):
    if eps is None:
        eps = 1e-3 * chain_diameter(J)
    if segment_distance(J, z) < eps:
        raise ValueError("point is within the clearance of the chain support")


def winding(J: DiffChain, z, eps: float | None = None) -> complex:
    """(1/2πi) ∮_J dw/(w − z)."""
    _check_plane_chain(J)
    z = complex(_to_complex(z))
    _clearance(J, z, eps)
    return pair_terms(J, _cauchy_kernel(z)) / (2j * math.pi)


def winding_polygon(vertices, z) -> float:
    """Classical winding number of a closed polygon from exact segment angles."""
    V = _to_complex(np.asarray(vertices, dtype=float))
    z = complex(_to_complex(z))
    w = V - z
    ang = np.angle(np.roll(w, -1) / w)
    return math.fsum(ang) / (2 * math.pi)


def cauchy_formula(f: HolomorphicSpec, J: DiffChain, z, eps: float | None = None) -> complex:
    """(1/2πi) ∮_J f(w)/(w − z) dw."""
    _check_plane_chain(J)
    _check_poles(f, J)
    z = complex(_to_complex(z))
    _clearance(J, z, eps)
    return pair_terms(J, _cauchy_kernel(z, f)) / (2j * math.pi)


def midpoint_error_estimate(f: HolomorphicSpec, J: DiffChain) -> float:
    """Σ |f''(p)|·|α|³/24: the leading error of a midpoint-chord term against the segment integral."""
    _check_plane_chain(J)
    if not len(J):
        return 0.0
    z = _to_complex(J.points)
    a = np.hypot(J.coeffs[:, 0], J.coeffs[:, 1])
    return float(math.fsum(np.abs(f.derivative(z, 2)) * a ** 3 / 24))


@dataclass(frozen=True)
class ResidueResult:
    value: complex
    error_estimate: float
    indices: tuple
    circle_integrals: tuple


def circle_integral(f: HolomorphicSpec, center: complex, radius: float, tol: float = 1e-13,
                    N0: int = 64, N_max: int = 1 << 16) -> tuple:
    """∮ f dz over a circle chain, doubling N with Richardson extrapolation.

    Returns (value, error estimate)."""
    c = (center.real, center.imag)

    def integral(N):
        # the circle bounds the declared pole disk, so the pole check is skipped
        return pair_terms(circle_chain(c, radius, N), lambda z, j: f.derivative(z, j))

    prev_raw = integral(N0)
    prev = None
    N = N0
    while True:
        N *= 2
        raw = integral(N)
        extrap = (4 * raw - prev_raw) / 3
        if prev is not None:
            err = abs(extrap - prev)
            if err <= tol * max(1.0, abs(extrap)) or N >= N_max:
                return extrap, err
        prev, prev_raw = extrap, raw


def residue_sum(f: HolomorphicSpec, J: DiffChain, tol: float = 1e-13, detailed: bool = False):
    """Σ_k Ind_J(a_k)·∮_{∂D_k} f dz over the declared poles a_k.

    Winding numbers within 1e−3 of an integer are rounded to it; the chain is
    expected to be closed.
    """
    _check_plane_chain(J)
    a, r = f.pole_array
    for i in range(len(a)):
        for k in range(i + 1, len(a)):
            if abs(a[i] - a[k]) <= r[i] + r[k]:
                raise ValueError("pole disks overlap")
    _check_poles(f, J)
    for ak, rk in zip(a, r):
        if segment_distance(J, ak) <= rk:
            raise ValueError("pole disk meets the chain")
    total, err, inds, ints = 0j, 0.0, [], []
    for ak, rk in zip(a, r):
        w = winding(J, ak, eps=0.0)
        ind = round(w.real) if abs(w - round(w.real)) < 1e-3 else w
        I, e = circle_integral(f, ak, rk, tol)
        total += ind * I
        err += abs(ind) * e
        inds.append(ind)
        ints.append(I)
    if detailed:
        return ResidueResult(total, err, tuple(inds), tuple(ints))
    return total


# ---------------------------------------------------------------------------
# signed density of polyhedral 2-chains


def _disk_segment_area(a: np.ndarray, b: np.ndarray, R: float) -> float:
    """Signed area of disk(0, R) ∩ triangle(0, a, b)."""
    def seg(p, q):
        # area of the sector-or-triangle piece between rays to p and q, with |p|,|q| handled per part
        cross = p[0] * q[1] - p[1] * q[0]
        dot = p[0] * q[0] + p[1] * q[1]
        return cross, dot

    d = b - a
    A = d @ d
    if A == 0:
        return 0.0
    B = a @ d
    C = a @ a - R * R
    disc = B * B - A * C
    pts = [a]
    if disc > 0:
        sq = math.sqrt(disc)
        for t in sorted(((-B - sq) / A, (-B + sq) / A)):
            if 0 < t < 1:
                pts.append(a + t * d)
    pts.append(b)
    total = 0.0
    for p, q in zip(pts[:-1], pts[1:]):
        mid = (p + q) / 2
        cross, dot = seg(p, q)
        if mid @ mid <= R * R:
            total += cross / 2
        else:
            total += R * R * math.atan2(cross, dot) / 2
    return total


def triangle_disk_area(tri: np.ndarray, z: np.ndarray, R: float) -> float:
    """Signed (by orientation) area of triangle ∩ disk(z, R)."""
    P = np.asarray(tri, dtype=float) - z
    return sum(_disk_segment_area(P[i], P[(i + 1) % 3], R) for i in range(3))


def _edge_distance(K: PolyhedralChain, z: np.ndarray) -> float:
    E = polyhedral_boundary(K) if len(K) else None
    V = K.vertices
    segs = np.concatenate([V[:, [0, 1]], V[:, [1, 2]], V[:, [2, 0]]])
    if E is not None and len(E):
        segs = np.concatenate([segs, E.vertices])
    a, b = segs[:, 0], segs[:, 1]
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    s = np.clip(np.einsum("ij,ij->i", z - a, d) / np.where(dd > 0, dd, 1), 0, 1)
    return float(np.linalg.norm(a + s[:, None] * d - z, axis=1).min())


@dataclass(frozen=True)
class DensityResult:
    value: float
    stderr: float
    eps: tuple
    per_eps: tuple
    method: str


def _point_in_triangles(x: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Boolean (M, T) membership of points x (M, 2) in triangles V (T, 3, 2)."""
    def side(p, a, b):
        return (b[None, :, 0] - a[None, :, 0]) * (p[:, None, 1] - a[None, :, 1]) - \
               (b[None, :, 1] - a[None, :, 1]) * (p[:, None, 0] - a[None, :, 0])
    s0 = side(x, V[:, 0], V[:, 1])
    s1 = side(x, V[:, 1], V[:, 2])
    s2 = side(x, V[:, 2], V[:, 0])
    return ((s0 >= 0) & (s1 >= 0) & (s2 >= 0)) | ((s0 <= 0) & (s1 <= 0) & (s2 <= 0))


def signed_density(K: PolyhedralChain, z, eps: Sequence[float] | None = None,
                   mc_budget: int = 0, seed: int = 0) -> DensityResult:
    """(1/πε²) Σ w_i·area(T_i ∩ B_ε(z)), extrapolated linearly in ε to ε = 0.

    ``mc_budget = 0`` uses exact triangle–disk areas; otherwise the areas are
    Monte Carlo estimates from uniform samples in each ball, and the reported
    standard error is floored at max|w|/samples.
    """
    if K.dim != 2 or K.grade != 2:
        raise ValueError("need a polyhedral 2-chain in R^2")
    z = np.asarray(z, dtype=float)
    if not len(K):
        return DensityResult(0.0, 0.0, (), (), "empty")
    dmin = _edge_distance(K, z)
    scale = float(np.ptp(K.vertices.reshape(-1, 2), axis=0).max())
    if dmin <= 1e-9 * scale:
        rng = np.random.default_rng(seed)
        warnings.warn("density point lies on a cell edge; perturbing it", RuntimeWarning)
        z = z + 1e-6 * scale * rng.standard_normal(2)
        dmin = _edge_distance(K, z)
    if eps is None:
        eps = tuple(dmin * 2.0 ** -(j + 1) for j in range(3))
    eps = tuple(float(e) for e in eps)
    orient = np.sign(simplex_vectors(K.vertices)[:, 0])
    w = K.weights * orient
    vals, errs = [], []
    if mc_budget:
        rng = np.random.default_rng(seed)
        m = max(1, mc_budget // len(eps))
        for e in eps:
            r = e * np.sqrt(rng.random(m))
            th = 2 * np.pi * rng.random(m)
            x = z + np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
            g = np.zeros(m)
            for lo in range(0, len(K), 256):
                inside = _point_in_triangles(x, K.vertices[lo:lo + 256])
                g += inside.astype(float) @ w[lo:lo + 256]
            vals.append(float(g.mean()))
            errs.append(max(float(g.std(ddof=1)) / math.sqrt(m) if m > 1 else 0.0,
                            float(np.abs(K.weights).max()) / m))
        method = "monte-carlo"
    else:
        for e in eps:
            a = np.array([triangle_disk_area(V, z, e) for V in K.vertices])
            vals.append(math.fsum(K.weights * a) / (math.pi * e * e))
            errs.append(1e-12)
        method = "exact"
    vals_a, errs_a = np.array(vals), np.array(errs)
    if len(eps) == 1:
        est, se = vals[0], errs[0]
    else:
        X = np.stack([np.ones(len(eps)), np.array(eps)], axis=1)
        Wt = 1.0 / errs_a ** 2
        cov = np.linalg.inv(X.T @ (Wt[:, None] * X))
        beta = cov @ (X.T @ (Wt * vals_a))
        est, se = float(beta[0]), float(math.sqrt(cov[0, 0]))
    return DensityResult(est, se, eps, tuple(vals), method)


# ---------------------------------------------------------------------------
# closing a polygonal chain away from a point


def close_approximation(P: PolyhedralChain, z, eps: float, radius: float = 1.0) -> PolyhedralChain:
    """Close each segment [a, b] into a + [a,b] + [b,π(b)] + [π(b),π(a)] + [π(a),a],
    π being the radial projection onto the circle of ``radius`` about z.
    """
    if P.dim != 2 or P.grade != 1:
        raise ValueError("need a polyhedral 1-chain in R^2")
    if not 0 < eps < radius:
        raise ValueError("need 0 < eps < radius")
    z = np.asarray(z, dtype=float)
    a, b = P.vertices[:, 0], P.vertices[:, 1]
    ab = b - a
    dd = np.einsum("ij,ij->i", ab, ab)
    s = np.clip(np.einsum("ij,ij->i", z - a, ab) / np.where(dd > 0, dd, 1), 0, 1)
    if len(P) and np.linalg.norm(a + s[:, None] * ab - z, axis=1).min() < eps:
        raise ValueError("chain meets the excluded ball")
    ra, rb = a - z, b - z
    pa = z + radius * ra / np.linalg.norm(ra, axis=1)[:, None]
    pb = z + radius * rb / np.linalg.norm(rb, axis=1)[:, None]
    cosang = np.einsum("ij,ij->i", ra, rb) / (np.linalg.norm(ra, axis=1) * np.linalg.norm(rb, axis=1))
    if len(P) and np.arccos(np.clip(cosang, -1, 1)).max() >= 2 * math.acos(eps / radius):
        raise ValueError("segment subtends too large an angle; its projected chord would enter the ball")
    w = P.weights
    cells = [np.stack([a, b], 1), np.stack([b, pb], 1), np.stack([pb, pa], 1), np.stack([pa, a], 1)]
    return PolyhedralChain(2, 1, np.tile(w, 4), np.concatenate(cells))
