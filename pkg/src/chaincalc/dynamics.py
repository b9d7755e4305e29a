"""Flows on flat tori: orbit chains J_T, measure chains ξ_{X,μ}, invariance and
ergodic-equality diagnostics.

Everything lives in the periodic lift R^n; forms and test functions are
expected to be 1-periodic in every coordinate.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .chain import DiffChain, boundary
from .fields import ExpWave, ScalarField, VectorField
from .form import FormSpec, evaluate, scalar_form
from .domains import polyline_chain


@dataclass(frozen=True)
class TorusFlow:
    """A 1-periodic Lipschitz vector field on R^n integrated by fixed-step RK4.

    ``X`` is the vectorised field; ``X_point`` is an optional plain-float version
    (tuple in, tuple out) that makes long orbits fast.
    """

    X: VectorField
    lipschitz: float
    h: float = 1e-3
    X_point: Optional[Callable[[tuple], tuple]] = None
    name: str = ""

    @property
    def dim(self) -> int:
        return self.X.dim

    def value(self, x) -> np.ndarray:
        return self.X.value(x)

    def point_field(self) -> Callable[[tuple], tuple]:
        if self.X_point is not None:
            return self.X_point
        return lambda x: tuple(self.X.value(np.asarray([x]))[0])

    def validate(self, samples: int = 2000, seed: int = 0, tol: float = 1e-12) -> dict:
        """Check periodicity and the declared Lipschitz constant on random samples."""
        rng = np.random.default_rng(seed)
        n = self.dim
        x = rng.random((samples, n))
        Xx = self.value(x)
        per = 0.0
        for a in range(n):
            e = np.zeros(n)
            e[a] = 1.0
            per = max(per, float(np.abs(self.value(x + e) - Xx).max()))
        if per > tol:
            raise ValueError(f"field is not 1-periodic (deviation {per:.3g})")
        d = rng.standard_normal((samples, n))
        d *= (10.0 ** rng.uniform(-4, -1, samples) / np.linalg.norm(d, axis=1))[:, None]
        q = np.linalg.norm(self.value(x + d) - Xx, axis=1) / np.linalg.norm(d, axis=1)
        lip = float(q.max())
        if lip > self.lipschitz * (1 + 1e-9):
            raise ValueError(f"observed Lipschitz ratio {lip:.6g} exceeds declared {self.lipschitz:.6g}")
        return {"periodicity": per, "lipschitz_observed": lip}


def _rk4_2d(F, x, y, h, steps):
    xs, ys = [x], [y]
    ax, ay = xs.append, ys.append
    h2, h6 = h / 2, h / 6
    for _ in range(steps):
        k1x, k1y = F((x, y))
        k2x, k2y = F((x + h2 * k1x, y + h2 * k1y))
        k3x, k3y = F((x + h2 * k2x, y + h2 * k2y))
        k4x, k4y = F((x + h * k3x, y + h * k3y))
        x += h6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        y += h6 * (k1y + 2 * k2y + 2 * k3y + k4y)
        ax(x)
        ay(y)
    return np.column_stack([np.array(xs), np.array(ys)])


def _rk4(F, p, h, steps):
    n = len(p)
    rng = range(n)
    out = [tuple(p)]
    x = list(p)
    for _ in range(steps):
        k1 = F(tuple(x))
        k2 = F(tuple(x[i] + h / 2 * k1[i] for i in rng))
        k3 = F(tuple(x[i] + h / 2 * k2[i] for i in rng))
        k4 = F(tuple(x[i] + h * k3[i] for i in rng))
        x = [x[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) for i in rng]
        out.append(tuple(x))
    return np.array(out)


def integrate(flow: TorusFlow, p, T: float) -> np.ndarray:
    """RK4 orbit φ_t(p) in the lift at t = 0, h, 2h, …, T (T/h rounded to an integer)."""
    if T <= 0:
        raise ValueError("T must be positive")
    p = tuple(float(c) for c in np.asarray(p, dtype=float).reshape(-1))
    if len(p) != flow.dim:
        raise ValueError("start point has wrong dimension")
    steps = max(1, int(round(T / flow.h)))
    F = flow.point_field()
    pts = _rk4_2d(F, p[0], p[1], flow.h, steps) if flow.dim == 2 else _rk4(F, p, flow.h, steps)
    if not np.all(np.isfinite(pts)):
        raise FloatingPointError("orbit integration diverged")
    chord = np.abs(np.diff(pts, axis=0)).max() if steps else 0.0
    vmax = float(np.abs(flow.value(np.mod(pts[:: max(1, steps // 1000)], 1.0))).max())
    if chord > 2 * flow.h * vmax + 1e-12:
        raise FloatingPointError("RK4 step is unstable for this field and step size")
    return pts


def orbit_chain_from_points(pts: np.ndarray, T: float) -> DiffChain:
    """(1/T)·Σ (chord midpoint; chord) along an orbit polyline."""
    return polyline_chain(pts, 1.0 / T)


def orbit_chain(flow: TorusFlow, p, T: float) -> DiffChain:
    return orbit_chain_from_points(integrate(flow, p, T), T)


def time_average(flow: TorusFlow, pts: np.ndarray) -> np.ndarray:
    """Trapezoid average of X along stored orbit points."""
    V = flow.value(np.mod(pts, 1.0))
    return (V[1:] + V[:-1]).sum(axis=0) / (2 * (len(pts) - 1))


# ---------------------------------------------------------------------------
# measures


class MeasureKind(enum.Enum):
    DIRAC_COMBINATION = "dirac"
    LEBESGUE_GRID = "lebesgue"


@dataclass(frozen=True)
class MeasureSpec:
    kind: MeasureKind
    points: np.ndarray
    weights: np.ndarray
    resolution: int = 0

    def __post_init__(self):
        if len(self.weights) == 0:
            raise ValueError("empty measure")
        if np.any(np.asarray(self.weights) <= 0):
            raise ValueError("weights must be positive")

    @property
    def total(self) -> float:
        return math.fsum(self.weights)

    @classmethod
    def dirac(cls, points, weights=None) -> "MeasureSpec":
        P = np.atleast_2d(np.asarray(points, dtype=float))
        w = np.ones(len(P)) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
        return cls(MeasureKind.DIRAC_COMBINATION, P, w)

    @classmethod
    def lebesgue(cls, m: int, dim: int = 2) -> "MeasureSpec":
        """Midpoint grid with m points per axis and total mass 1."""
        g = (np.arange(m) + 0.5) / m
        P = np.stack(np.meshgrid(*[g] * dim, indexing="ij"), -1).reshape(-1, dim)
        return cls(MeasureKind.LEBESGUE_GRID, P, np.full(len(P), 1.0 / m ** dim), m)


def measure_chain(flow: TorusFlow, mu: MeasureSpec) -> DiffChain:
    """Σ (p_k; c_k X(p_k))."""
    return DiffChain(flow.dim, 1, mu.points, mu.weights[:, None] * flow.value(mu.points))


def trig_bank(dim: int = 2, degree: int = 3) -> list:
    """cos and sin of 2π k·x for nonzero integer k with |k|_∞ ≤ degree, one of each ±k pair."""
    out = []
    for k in itertools.product(range(-degree, degree + 1), repeat=dim):
        k = np.array(k, dtype=float)
        nz = np.flatnonzero(k)
        if not len(nz) or k[nz[0]] < 0:
            continue
        out.append(ExpWave.cos(2 * np.pi * k))
        out.append(ExpWave.sin(2 * np.pi * k))
    return out


def _wave_boundary_pairings(A: DiffChain, tests: Sequence[ExpWave]) -> np.ndarray:
    """∮_{∂A} f = Σ D_α f(p) for marker-free 1-chains, sharing exp(κ·p) across tests."""
    cache = {}
    out = np.empty(len(tests))
    for i, f in enumerate(tests):
        key = f.kappa.tobytes()
        if key not in cache:
            if f.bounded:
                # κ = iω: D_α e^{iω·p} = i(ω·α) e^{iω·p}
                w = f.kappa.imag
                th, s = A.points @ w, A.coeffs @ w
                cache[key] = complex(-(s @ np.sin(th)), s @ np.cos(th))
            else:
                z = np.exp(A.points @ f.kappa) * (A.coeffs @ f.kappa)
                cache[key] = complex(math.fsum(z.real), math.fsum(z.imag))
        out[i] = (f.amplitude * cache[key]).real
    return out


def boundary_pairings(A: DiffChain, tests: Sequence[ScalarField]) -> np.ndarray:
    """∮_{∂A} f for each test function."""
    if A.grade == 1 and A.marker_free and all(isinstance(f, ExpWave) for f in tests):
        return _wave_boundary_pairings(A, tests)
    dA = boundary(A)
    return np.array([evaluate(scalar_form(f), dA) for f in tests])


def invariance_residual(flow: TorusFlow, mu: MeasureSpec, tests: Sequence[ScalarField] | None = None) -> float:
    """max_f |∮_{∂ξ} f| = max_f |∫ X(f) dμ| over the test bank."""
    tests = trig_bank(flow.dim) if tests is None else tests
    return float(np.abs(boundary_pairings(measure_chain(flow, mu), tests)).max())


def ergodic_gap(flow: TorusFlow, p, T: float, mu: MeasureSpec, forms: Sequence[FormSpec],
                orbit: DiffChain | None = None, invariance_tol: float = 1e-6) -> float:
    """max_ω |ω(J_T) − ω(ξ_{X,μ})/μ(M)|."""
    res = invariance_residual(flow, mu)
    if res > invariance_tol:
        raise ValueError(f"measure is not invariant (residual {res:.3g})")
    J = orbit_chain(flow, p, T) if orbit is None else orbit
    xi = measure_chain(flow, mu)
    return max(abs(evaluate(w, J) - evaluate(w, xi) / mu.total) for w in forms)


# ---------------------------------------------------------------------------
# horizon ladders


@dataclass(frozen=True)
class LadderResult:
    T: tuple
    values: np.ndarray       # (len(T), len(forms)) form pairings
    boundary: np.ndarray     # (len(T), len(tests)) boundary pairings
    slope: float             # fitted log–log exponent of max |boundary pairing|


def ladder(flow: TorusFlow, p, T_values: Sequence[float], forms: Sequence[FormSpec],
           tests: Sequence[ScalarField] | None = None) -> LadderResult:
    """Pairings of J_T for each T, from a single integration to max(T)."""
    T_values = tuple(sorted(float(t) for t in T_values))
    tests = trig_bank(flow.dim) if tests is None else tests
    pts = integrate(flow, p, T_values[-1])
    vals, bnd = [], []
    for T in T_values:
        J = orbit_chain_from_points(pts[: int(round(T / flow.h)) + 1], T)
        vals.append([evaluate(w, J) for w in forms])
        bnd.append(boundary_pairings(J, tests))
    bnd = np.array(bnd)
    slope = float(np.polyfit(np.log(T_values), np.log(np.abs(bnd).max(axis=1)), 1)[0]) \
        if len(T_values) > 1 else float("nan")
    return LadderResult(T_values, np.array(vals), bnd, slope)


def cauchy_envelope(values: np.ndarray) -> np.ndarray:
    """E[i] = max over pairs s, t ≥ T_i of |pairing(J_t) − pairing(J_s)| (max over forms)."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    m = len(values)
    E = np.zeros(m)
    for i in range(m):
        tail = values[i:]
        E[i] = float((tail.max(axis=0) - tail.min(axis=0)).max())
    return E
