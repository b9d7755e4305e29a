"""Command line experiment runner.

Every subcommand writes deterministic JSON (or CSV) with a metadata block and
exits nonzero when a tolerance check fails.  Exit codes: 0 ok, 1 check
failed, 2 usage, 3 input/output error, 4 invalid input.
"""
from __future__ import annotations

import os
import sys

# cap BLAS workers before numpy is imported
_THREADS = os.environ.get("CHAINCALC_THREADS")
if _THREADS:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _THREADS)

import argparse  # noqa: E402
import json  # noqa: E402
from dataclasses import dataclass, field  # noqa: E402

import numpy as np  # noqa: E402

from . import cauchy as cx  # noqa: E402
from . import chain as ch  # noqa: E402
from . import domains as dom  # noqa: E402
from . import dynamics as dyn  # noqa: E402
from . import form as fm  # noqa: E402
from . import io as cio  # noqa: E402
from . import norm as nm  # noqa: E402
from . import registry as reg  # noqa: E402
from . import selftest as st  # noqa: E402

SELFTEST_MODULES = {
    "domain": ["domains"],
    "norm-estimate": ["norm"],
    "stokes-check": ["chain", "form"],
    "cauchy": ["complex"],
    "winding": ["complex"],
    "residue": ["complex"],
    "density": ["complex", "domains"],
    "asymptotic-cycle": ["dynamics"],
    "measure-chain": ["dynamics"],
    "selftest": None,
}


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    out: str | None = None


def threads() -> int:
    raw = os.environ.get("CHAINCALC_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"CHAINCALC_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValueError("CHAINCALC_THREADS must be >= 1")
    return n


def _point(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",")])


def _complex(z: complex) -> dict:
    return {"value_re": z.real, "value_im": z.imag}


def _emit(cfg: ExperimentConfig, result: dict) -> str:
    obj = {"metadata": cio.metadata(cfg.command, cfg.params, cfg.seed), "result": result}
    return cio.write_json(cfg.out, obj)


def _load_chain(path) -> ch.DiffChain:
    A = cio.load_chain(path)
    if isinstance(A, dom.PolyhedralChain):
        A = dom.polyhedral_to_pointed(A, 0)
    return A


# ---------------------------------------------------------------------------
# subcommands


def cmd_domain(a, cfg):
    A = reg.domain(a.kind, a.level)
    if a.out:
        cio.save_chain(a.out, A)
    return {"kind": a.kind, "level": a.level, "terms": len(A), "mass": ch.mass_upper(A),
            "out": a.out}, None


def cmd_norm_estimate(a, cfg):
    A = _load_chain(a.chain)
    if a.region:
        region = fm.Region.parse(a.region)
        if len(A) and not np.all((A.points >= region.lo) & (A.points <= region.hi)):
            raise ValueError("chain support leaves the region")
    b = nm.bracket(A, a.order, reg.probe_library(A.dim, A.grade))
    ok = b.lower <= b.upper
    return {"lower": b.lower, "upper": b.upper,
            "certificate_size": b.certificate.size if b.certificate is not None else 0}, ok


def cmd_stokes_check(a, cfg):
    w = reg.form(a.form)
    A = reg.domain(a.domain, a.level)
    if w.grade + 1 != A.grade:
        raise ValueError(f"form grade {w.grade} cannot be checked on a grade-{A.grade} chain")
    lhs = fm.evaluate(fm.exterior_derivative(w), A)
    rhs = fm.evaluate(w, ch.boundary(A))
    err = abs(lhs - rhs)
    return {"d_form_on_chain": lhs, "form_on_boundary": rhs, "difference": err}, err <= a.tol * (1 + abs(lhs))


def cmd_cauchy(a, cfg):
    f = reg.function(a.f)
    J = _load_chain(a.chain)
    if a.z is not None:
        v = cx.cauchy_formula(f, J, complex(*_point(a.z)))
        err = cx.midpoint_error_estimate(f, J)
    else:
        v = cx.complex_pair(f, J)
        err = cx.midpoint_error_estimate(f, J)
    ok = None
    if a.expect is not None:
        e = _point(a.expect)
        ok = abs(v - complex(e[0], e[1])) <= a.tol
    return {**_complex(v), "error_estimate": err}, ok


def _centroid(J: ch.DiffChain) -> complex:
    w = np.hypot(J.coeffs[:, 0], J.coeffs[:, 1])
    c = (J.points * w[:, None]).sum(axis=0) / w.sum()
    return complex(c[0], c[1])


def cmd_winding(a, cfg):
    J = _load_chain(a.chain)
    z = _centroid(J) if a.z == "centroid" else complex(*_point(a.z))
    w = cx.winding(J, z, a.eps)
    dist = abs(w - round(w.real))
    ok = dist <= a.tol if a.integer else None
    return {**_complex(w), "z": [z.real, z.imag], "error_estimate": dist}, ok


def cmd_residue(a, cfg):
    f = reg.function(a.f)
    if a.poles:
        poles = [((p["at"][0] + 1j * p["at"][1]), float(p["radius"])) for p in cio.read_json(a.poles)]
        f = cx.HolomorphicSpec(f.f, f.derivatives, tuple(poles), f.name)
    J = _load_chain(a.chain)
    r = cx.residue_sum(f, J, detailed=True)
    direct = cx.complex_pair(f, J)
    gap = abs(direct - r.value)
    ok = gap <= a.tol * (1 + abs(r.value))
    return {**_complex(r.value), "error_estimate": r.error_estimate,
            "contour_re": direct.real, "contour_im": direct.imag, "gap": gap,
            "indices": [complex(i).real for i in r.indices]}, ok


def _star_polygon(seed: int, m: int = 9) -> np.ndarray:
    rng = np.random.default_rng(seed)
    ang = np.sort(rng.uniform(0, 2 * np.pi, m))
    rad = rng.uniform(0.5, 1.0, m)
    return np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)


def cmd_density(a, cfg):
    if a.polygon:
        V = np.asarray(cio.read_json(a.polygon), dtype=float)
    else:
        V = _star_polygon(a.seed)
    P = dom.PolyhedralChain.polygon(V)
    w0 = _point(a.cone) if a.cone else np.zeros(2)
    K = dom.cone_at(w0, P)
    z = _point(a.z)
    d = cx.signed_density(K, z, mc_budget=a.mc, seed=a.seed)
    J = dom.polygon_chain(V, a.n_per_edge)
    w = cx.winding(J, complex(z[0], z[1]), eps=0.0).real
    ok = abs(d.value - w) <= 3 * d.stderr + 1e-9
    return {"density": d.value, "stderr": d.stderr, "winding": w, "method": d.method}, ok


def cmd_asymptotic_cycle(a, cfg):
    flow = reg.flow(a.field)
    names = cio.read_json(a.forms) if a.forms else ["dx", "dy", "cos2pix_dx"]
    forms = [reg.form(n) for n in names]
    Ts = [float(t) for t in a.checkpoints.split(",")] if a.checkpoints else [a.T]
    Ts = [t for t in Ts if t <= a.T] or [a.T]
    L = dyn.ladder(flow, _point(a.p), Ts, forms)
    header = ["T"] + list(names) + ["boundary_max"]
    rows = [[T] + list(v) + [float(np.abs(b).max())] for T, v, b in zip(L.T, L.values, L.boundary)]
    text = cio.csv_text(header, rows)
    meta = cio.metadata(cfg.command, cfg.params, cfg.seed)
    text = "".join(f"# {k}={json.dumps(cio._plain(v), sort_keys=True)}\n" for k, v in sorted(meta.items())) + text
    return text, None


def cmd_measure_chain(a, cfg):
    flow = reg.flow(a.field)
    mu = dyn.MeasureSpec.lebesgue(a.grid, flow.dim)
    xi = dyn.measure_chain(flow, mu)
    names = cio.read_json(a.forms) if a.forms else ["dx", "dy", "cos2pix_dx"]
    pair = {n: fm.evaluate(reg.form(n), xi) for n in names}
    res = dyn.invariance_residual(flow, mu)
    if a.out_chain:
        cio.save_chain(a.out_chain, xi)
    return {"grid": a.grid, "terms": len(xi), "pairings": pair, "invariance_residual": res,
            "invariant": res <= 1e-6}, None


def cmd_selftest(a, cfg):
    rows = st.run(a.modules.split(",") if a.modules else None)
    return {"checks": rows}, all(r["ok"] for r in rows)


COMMANDS = {
    "domain": cmd_domain,
    "norm-estimate": cmd_norm_estimate,
    "stokes-check": cmd_stokes_check,
    "cauchy": cmd_cauchy,
    "winding": cmd_winding,
    "residue": cmd_residue,
    "density": cmd_density,
    "asymptotic-cycle": cmd_asymptotic_cycle,
    "measure-chain": cmd_measure_chain,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chaincalc", description="Differential chain experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--out", default=None, help="output file (default: stdout)")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--selftest", action="store_true", help="run this module's invariant checks")
        return s

    s = add("domain", "build a named domain chain")
    s.add_argument("--kind", choices=sorted(reg.DOMAINS), default="cube")
    s.add_argument("--level", type=int, default=0)

    s = add("norm-estimate", "bracket the r-norm of a chain")
    s.add_argument("--chain")
    s.add_argument("--order", type=int, default=1)
    s.add_argument("--region", default=None, help="lo_x,lo_y:hi_x,hi_y")

    s = add("stokes-check", "compare dω on a chain with ω on its boundary")
    s.add_argument("--form", default="rot")
    s.add_argument("--domain", default="cube")
    s.add_argument("--level", type=int, default=2)
    s.add_argument("--tol", type=float, default=1e-10)

    s = add("cauchy", "contour integral of a named function over a chain")
    s.add_argument("--f", default="exp")
    s.add_argument("--chain")
    s.add_argument("--z", default=None, help="evaluate the Cauchy formula at x,y")
    s.add_argument("--expect", default=None, help="re,im expected value")
    s.add_argument("--tol", type=float, default=1e-6)

    s = add("winding", "winding number of a 1-chain about a point")
    s.add_argument("--chain")
    s.add_argument("--z", default="0,0", help="x,y or 'centroid'")
    s.add_argument("--eps", type=float, default=None)
    s.add_argument("--integer", action="store_true", help="fail unless the result is near an integer")
    s.add_argument("--tol", type=float, default=1e-4)

    s = add("residue", "residue sum versus the contour integral")
    s.add_argument("--f", default="pole03_exp")
    s.add_argument("--chain")
    s.add_argument("--poles", default=None, help='JSON list of {"at":[x,y],"radius":r}')
    s.add_argument("--tol", type=float, default=1e-5)

    s = add("density", "signed density of a cone versus the winding number")
    s.add_argument("--polygon", default=None, help="JSON list of polygon vertices")
    s.add_argument("--cone", default=None, help="cone point x,y")
    s.add_argument("--z", default="0.1,0.05")
    s.add_argument("--mc", type=int, default=20000)
    s.add_argument("--n-per-edge", type=int, default=4096)

    s = add("asymptotic-cycle", "orbit chain pairings over a horizon ladder (CSV)")
    s.add_argument("--field", default="shear")
    s.add_argument("--p", default="0.1,0.2")
    s.add_argument("--T", type=float, default=2000.0)
    s.add_argument("--checkpoints", default="250,500,1000,2000")
    s.add_argument("--forms", default=None, help="JSON list of form names")

    s = add("measure-chain", "measure chain of a flow against the Lebesgue grid")
    s.add_argument("--field", default="shear")
    s.add_argument("--grid", type=int, default=64)
    s.add_argument("--forms", default=None, help="JSON list of form names")
    s.add_argument("--out-chain", default=None)

    s = add("selftest", "run every module's invariant checks")
    s.add_argument("--modules", default=None, help="comma-separated module names")
    return p


def _error(code: str, message: str, status: int) -> int:
    sys.stderr.write(cio.dumps({"error": code, "message": message}))
    return status


def run(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    params = {k: v for k, v in sorted(vars(a).items()) if k not in ("out", "seed", "command", "selftest")}
    # the domain command writes its chain to --out and reports on stdout
    cfg = ExperimentConfig(a.command, params, a.seed, None if a.command == "domain" else a.out)
    try:
        threads()
        if a.selftest and a.command != "selftest":
            mods = SELFTEST_MODULES[a.command]
            rows = st.run(mods)
            text = _emit(cfg, {"checks": rows})
            ok = all(r["ok"] for r in rows)
        else:
            needs_chain = a.command in ("norm-estimate", "cauchy", "winding", "residue")
            if needs_chain and not a.chain:
                return _error("missing_argument", "--chain is required", 2)
            result, ok = COMMANDS[a.command](a, cfg)
            if isinstance(result, str):
                text = result
                if cfg.out:
                    with open(cfg.out, "w") as fh:
                        fh.write(text)
            else:
                result["check_passed"] = ok
                text = _emit(cfg, result)
    except (FileNotFoundError, PermissionError, IsADirectoryError) as e:
        return _error("io_error", str(e), 3)
    except (ValueError, KeyError) as e:
        return _error("invalid_input", str(e), 4)
    if cfg.out is None:
        sys.stdout.write(text)
    return 1 if ok is False else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
