"""Named forms, complex functions, flows and domains for the command line and
the experiment scripts."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import domains as dom
from .cauchy import HolomorphicSpec, holomorphic
from .chain import DiffChain
from .dynamics import TorusFlow
from .fields import Constant, ExpWave, Kink, Polynomial, ProductField, VectorField
from .form import FormSpec, constant_form, scalar_form

TAU = 2 * math.pi
GAMMA = math.sqrt(2)


def _poly(terms) -> Polynomial:
    return Polynomial(2, terms)


def _trig(kind: str, k) -> ExpWave:
    return getattr(ExpWave, kind)(TAU * np.asarray(k, dtype=float))


def _with_bounds(w: FormSpec, bounds: dict, name: str) -> FormSpec:
    from dataclasses import replace
    return replace(w, declared_norm_bounds=bounds, name=name)


def _wave_bounds(freq: float, orders: int = 8) -> dict:
    """max_{j ≤ r} freq^j: bounds |D^j| for a unit-amplitude wave coefficient."""
    return {r: max(1.0, freq ** r) for r in range(orders)}


FORMS: dict[str, Callable[[], FormSpec]] = {
    "one": lambda: _with_bounds(scalar_form(Constant(2, 1.0)), {r: 1.0 for r in range(8)}, "one"),
    "x": lambda: scalar_form(_poly({(1, 0): 1.0})),
    "dx": lambda: _with_bounds(constant_form(2, {(0,): 1.0}), {r: 1.0 for r in range(8)}, "dx"),
    "dy": lambda: _with_bounds(constant_form(2, {(1,): 1.0}), {r: 1.0 for r in range(8)}, "dy"),
    "dxdy": lambda: _with_bounds(constant_form(2, {(0, 1): 1.0}), {r: 1.0 for r in range(8)}, "dxdy"),
    "rot": lambda: FormSpec(2, 1, {(0,): _poly({(0, 1): -1.0}), (1,): _poly({(1, 0): 1.0})}, name="rot"),
    "cos2pix_dx": lambda: _with_bounds(FormSpec(2, 1, {(0,): _trig("cos", [1, 0])}), _wave_bounds(TAU),
                                       "cos2pix_dx"),
    "sin2piy_dx": lambda: _with_bounds(FormSpec(2, 1, {(0,): _trig("sin", [0, 1])}), _wave_bounds(TAU),
                                       "sin2piy_dx"),
    "cos2pi_x_minus_2y_dx": lambda: _with_bounds(FormSpec(2, 1, {(0,): _trig("cos", [1, -2])}),
                                                 _wave_bounds(TAU * math.sqrt(5)), "cos2pi_x_minus_2y_dx"),
    "poly_dx": lambda: FormSpec(2, 1, {(0,): _poly({(2, 1): 1.0}), (1,): _poly({(0, 3): 0.5})}, name="poly_dx"),
    "expx_cos2y_dxdy": lambda: FormSpec(2, 2, {(0, 1): ProductField(ExpWave(2, 1.0, [1.0, 0.0]),
                                                                     ExpWave.cos([0.0, 2.0]))},
                                         name="expx_cos2y_dxdy"),
    "kink_dx": lambda: FormSpec(2, 1, {(0,): Kink([1.0, 0.0], 0.5)}, name="kink_dx"),
}


def form(name: str) -> FormSpec:
    try:
        return FORMS[name]()
    except KeyError:
        raise KeyError(f"unknown form {name!r}; known: {sorted(FORMS)}") from None


def smooth_form_bank() -> list:
    """Smooth 1- and 2-forms on [0,1]² used for the norm cross-check."""
    return [
        FormSpec(2, 1, {(0,): _poly({(1, 1): 1.0})}, name="xy_dx"),
        FormSpec(2, 1, {(1,): ProductField(ExpWave.sin([math.pi, 0.0]), ExpWave.cos([0.0, math.pi]))},
                 name="sinpix_cospiy_dy"),
        FormSpec(2, 1, {(0,): ExpWave(2, 1.0, [0.5, 0.0]), (1,): _poly({(0, 2): 0.5})}, name="exp_mixed"),
        FormSpec(2, 2, {(0, 1): ExpWave.cos([1.0, 2.0])}, name="cos_dxdy"),
    ]


def probe_library(dim: int, grade: int, max_freq: int = 2) -> list:
    """Forms with declared B^r bounds for dual lower bounds: constant blades and
    unit waves cos/sin(2π k·x) on each blade."""
    from . import multivector as mv
    out = []
    for I in mv.blades(dim, grade):
        out.append(_with_bounds(constant_form(dim, {I: 1.0}), {r: 1.0 for r in range(8)}, f"e{I}"))
    ks = [k for k in np.ndindex(*(2 * max_freq + 1,) * dim)]
    for k in ks:
        k = np.array(k, dtype=float) - max_freq
        nz = np.flatnonzero(k)
        if not len(nz) or k[nz[0]] < 0:
            continue
        for kind in ("cos", "sin"):
            f = getattr(ExpWave, kind)(TAU * k)
            for I in mv.blades(dim, grade):
                out.append(_with_bounds(FormSpec(dim, grade, {I: f}), _wave_bounds(TAU * float(np.linalg.norm(k))),
                                        f"{kind}{tuple(int(c) for c in k)}e{I}"))
    return out


# ---------------------------------------------------------------------------
# complex functions


def _recip(a: complex):
    return lambda z: 1.0 / (z - a)


FUNCTIONS: dict[str, Callable[[], HolomorphicSpec]] = {
    "one": lambda: holomorphic(lambda z: np.ones_like(z), lambda z: np.zeros_like(z), name="one"),
    "exp": lambda: holomorphic(np.exp, np.exp, np.exp, np.exp, name="exp"),
    "z2": lambda: holomorphic(lambda z: z * z, lambda z: 2 * z, lambda z: 2 + 0 * z, name="z2"),
    "recip": lambda: holomorphic(_recip(0.0), lambda z: -1.0 / z ** 2, poles=[(0.0, 0.05)], name="recip"),
    "pole03_exp": lambda: holomorphic(lambda z: 1.0 / (z - 0.3) + np.exp(z),
                                      lambda z: -1.0 / (z - 0.3) ** 2 + np.exp(z),
                                      poles=[(0.3, 0.05)], name="pole03_exp"),
    "two_poles": lambda: holomorphic(lambda z: 1.0 / (z - 0.5) - 2.0 / (z + 0.5j),
                                     poles=[(0.5, 0.05), (-0.5j, 0.05)], name="two_poles"),
    "conj": lambda: HolomorphicSpec(np.conj, name="conj"),
}


def function(name: str) -> HolomorphicSpec:
    try:
        return FUNCTIONS[name]()
    except KeyError:
        raise KeyError(f"unknown function {name!r}; known: {sorted(FUNCTIONS)}") from None


# ---------------------------------------------------------------------------
# flows on T²


def _shear(eps: float, gamma: float) -> TorusFlow:
    X = VectorField([Constant(2, 1.0) + _trig("sin", [0, 1]) * eps, Constant(2, gamma)])
    return TorusFlow(X, lipschitz=TAU * eps,
                     X_point=lambda p: (1.0 + eps * math.sin(TAU * p[1]), gamma), name="shear")


def _linear(gamma: float, name: str) -> TorusFlow:
    X = VectorField([Constant(2, 1.0), Constant(2, gamma)])
    return TorusFlow(X, lipschitz=0.0, X_point=lambda p: (1.0, gamma), name=name)


def _cellular() -> TorusFlow:
    # divergence free: X = (sin 2πy, sin 2πx)
    X = VectorField([_trig("sin", [0, 1]), _trig("sin", [1, 0])])
    return TorusFlow(X, lipschitz=TAU, X_point=lambda p: (math.sin(TAU * p[1]), math.sin(TAU * p[0])),
                     name="cellular")


def _compressible() -> TorusFlow:
    X = VectorField([Constant(2, 1.0) + _trig("sin", [1, 0]) * 0.5, Constant(2, 0.0)])
    return TorusFlow(X, lipschitz=TAU * 0.5, X_point=lambda p: (1.0 + 0.5 * math.sin(TAU * p[0]), 0.0),
                     name="compressible")


def _sink() -> TorusFlow:
    # fixed points wherever sin 2πx = sin 2πy = 0, e.g. the origin
    X = VectorField([_trig("sin", [1, 0]), _trig("sin", [0, 1])])
    return TorusFlow(X, lipschitz=TAU, X_point=lambda p: (math.sin(TAU * p[0]), math.sin(TAU * p[1])),
                     name="sink")


FLOWS: dict[str, Callable[[], TorusFlow]] = {
    "shear": lambda: _shear(0.3, GAMMA),
    "linear": lambda: _linear(GAMMA, "linear"),
    "rational": lambda: _linear(0.5, "rational"),
    "cellular": _cellular,
    "compressible": _compressible,
    "sink": _sink,
}


def flow(name: str) -> TorusFlow:
    try:
        return FLOWS[name]()
    except KeyError:
        raise KeyError(f"unknown field {name!r}; known: {sorted(FLOWS)}") from None


# ---------------------------------------------------------------------------
# domains


def _simplex(level: int) -> DiffChain:
    return dom.simplex_chain([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], level)


DOMAINS: dict[str, Callable[[int], DiffChain]] = {
    "cube": lambda L: dom.cube_chain(level=L),
    "whitney-disk": lambda L: dom.whitney_chain(dom.disk(), L),
    "whitney-annulus": lambda L: dom.whitney_chain(dom.annulus(), L),
    "simplex": _simplex,
    "circle": lambda L: dom.circle_chain(N=1 << L),
    "square": lambda L: dom.polygon_chain(dom.square_vertices(), 1 << L),
    "koch": lambda L: dom.koch_boundary(L).chain(),
}


def domain(kind: str, level: int) -> DiffChain:
    try:
        build = DOMAINS[kind]
    except KeyError:
        raise KeyError(f"unknown domain {kind!r}; known: {sorted(DOMAINS)}") from None
    return build(level)
