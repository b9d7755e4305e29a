"""Random chains and forms shared by the tests."""
import numpy as np

from chaincalc import multivector as mv
from chaincalc.chain import DiffChain
from chaincalc.fields import Polynomial, VectorField
from chaincalc.form import FormSpec


def random_chain(rng, n, k, N=6, J=2, integer=True) -> DiffChain:
    """Chain on a dyadic lattice with small integer coefficients and markers."""
    if integer:
        pts = rng.integers(-4, 5, (N, n)) / 4.0
        co = rng.integers(-3, 4, (N, mv.nblades(n, k))).astype(float)
        mk = rng.integers(-2, 3, (N, J, n)).astype(float)
    else:
        pts = rng.uniform(-1, 1, (N, n))
        co = rng.standard_normal((N, mv.nblades(n, k)))
        mk = rng.standard_normal((N, J, n))
    dp = rng.integers(0, J + 1, N)
    mk[np.arange(J)[None, :] >= dp[:, None]] = 0.0
    return DiffChain(n, k, pts, co, dp, mk)


def random_polynomial(rng, n, degree=3, terms=4) -> Polynomial:
    out = {}
    for _ in range(terms):
        e = [0] * n
        for _ in range(int(rng.integers(0, degree + 1))):
            e[int(rng.integers(n))] += 1
        out[tuple(e)] = out.get(tuple(e), 0.0) + float(rng.uniform(-1, 1))
    return Polynomial(n, out)


def random_form(rng, n, k, degree=3) -> FormSpec:
    return FormSpec(n, k, {b: random_polynomial(rng, n, degree) for b in mv.blades(n, k)})


def random_vector_field(rng, n, degree=2) -> VectorField:
    return VectorField([random_polynomial(rng, n, degree) for _ in range(n)])
