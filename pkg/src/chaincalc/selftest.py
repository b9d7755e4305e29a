"""Fast invariant checks per module, used by ``chaincalc selftest`` and by
``--selftest`` on each subcommand."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import cauchy as cx
from . import chain as ch
from . import domains as dom
from . import dynamics as dyn
from . import form as fm
from . import multivector as mv
from . import norm as nm
from . import registry as reg


def _random_chain(rng, n, k, N=6, J=2) -> ch.DiffChain:
    pts = rng.integers(-4, 5, (N, n)) / 4.0
    co = rng.integers(-3, 4, (N, mv.nblades(n, k))).astype(float)
    dp = rng.integers(0, J + 1, N)
    mk = rng.integers(-2, 3, (N, J, n)).astype(float)
    mk[np.arange(J)[None, :] >= dp[:, None]] = 0.0
    return ch.DiffChain(n, k, pts, co, dp, mk)


def check_multivector() -> list:
    rng = np.random.default_rng(1)
    ok = True
    for n in range(1, 5):
        for k in range(n + 1):
            a = mv.KVector.from_array(n, k, rng.standard_normal(mv.nblades(n, k)))
            bb = mv.hodge_complement(mv.hodge_complement(a))
            ok &= bb == a * (-1) ** (k * (n - k))
    return [("hodge complement twice is ±identity", bool(ok), "")]


def check_chain() -> list:
    rng = np.random.default_rng(2)
    ok_bb, ok_pp = True, True
    for _ in range(20):
        n = int(rng.integers(1, 5))
        k = int(rng.integers(0, n + 1))
        A = _random_chain(rng, n, k)
        if k >= 2:
            ok_bb &= ch.boundary(ch.boundary(A)).is_zero()
        ok_pp &= ch.perp(ch.perp(A)) == A * (-1) ** (k * (n - k))
    return [("boundary squares to zero", bool(ok_bb), ""), ("perp twice is ±identity", bool(ok_pp), "")]


def check_form() -> list:
    rng = np.random.default_rng(3)
    w = reg.form("poly_dx")
    A = _random_chain(rng, 2, 2, J=1)
    lhs = fm.evaluate(fm.exterior_derivative(w), A)
    rhs = fm.evaluate(w, ch.boundary(A))
    return [("Stokes on a random chain", abs(lhs - rhs) <= 1e-10 * (1 + abs(lhs)), f"{lhs!r} vs {rhs!r}")]


def check_norm() -> list:
    A = dom.cube_difference(dim=2, level=4)
    c = nm.certify_pairing(A)
    bound = dom.cube_error_bound(2, 4)
    return [("cube pairing certificate", c.cost <= bound and c.verify(A), f"{c.cost} <= {bound}")]


def check_domains() -> list:
    K = dom.koch_boundary(1)
    P = dom.PolyhedralChain.polygon(dom.square_vertices())
    C = dom.cone_at([0.1, 0.2], P)
    return [("Koch level 1 has length 4", abs(K.length - 4) < 1e-12, f"{K.length}"),
            ("boundary of cone is the polygon", dom.polyhedral_boundary(C) == P, "")]


def check_cauchy() -> list:
    J = dom.polygon_chain(dom.square_vertices(), 256)
    w = cx.winding(J, 0.0)
    v = cx.complex_pair(reg.function("exp"), J)
    return [("square winds once about 0", abs(w - 1) < 1e-4, f"{w}"),
            ("Cauchy theorem for exp", abs(v) < 1e-5, f"{v}")]


def check_dynamics() -> list:
    mu = dyn.MeasureSpec.lebesgue(32)
    r_inv = dyn.invariance_residual(reg.flow("cellular"), mu)
    r_cmp = dyn.invariance_residual(reg.flow("compressible"), mu)
    J = dyn.orbit_chain(reg.flow("linear"), (0.1, 0.2), 10.0)
    dx = reg.form("dx")
    return [("divergence-free field leaves Lebesgue invariant", r_inv < 1e-10, f"{r_inv}"),
            ("compressible field is detected", r_cmp > 1e-2, f"{r_cmp}"),
            ("linear orbit pairs with dx to 1", abs(fm.evaluate(dx, J) - 1) < 1e-10, "")]


SUITES: dict[str, Callable[[], list]] = {
    "multivector": check_multivector,
    "chain": check_chain,
    "form": check_form,
    "norm": check_norm,
    "domains": check_domains,
    "complex": check_cauchy,
    "dynamics": check_dynamics,
}


def run(modules=None) -> list:
    out = []
    for name in modules or SUITES:
        for label, ok, detail in SUITES[name]():
            out.append({"module": name, "check": label, "ok": bool(ok), "detail": detail})
    return out
