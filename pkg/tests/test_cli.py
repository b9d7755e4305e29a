import json
import math
import subprocess
import sys

import numpy as np
import pytest

from chaincalc import cli
from chaincalc import domains as dom
from chaincalc import io as cio
from chaincalc.chain import DiffChain


def call(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def square(tmp_path, capsys):
    path = tmp_path / "square.json"
    code, out, _ = call(capsys, "domain", "--kind", "square", "--level", "10", "--out", str(path))
    assert code == 0 and json.loads(out)["result"]["terms"] == 4096
    return str(path)


def test_domain_roundtrip(tmp_path, capsys):
    path = tmp_path / "cube.json"
    code, out, _ = call(capsys, "domain", "--kind", "cube", "--level", "2", "--out", str(path))
    assert code == 0
    assert cio.load_chain(path) == dom.cube_chain(level=2)
    assert math.isclose(json.loads(out)["result"]["mass"], 1.0)


def test_output_is_deterministic(capsys):
    a = call(capsys, "stokes-check", "--form", "rot", "--domain", "simplex", "--level", "2")[1]
    b = call(capsys, "stokes-check", "--form", "rot", "--domain", "simplex", "--level", "2")[1]
    assert a == b
    obj = json.loads(a)
    assert obj["metadata"]["command"] == "stokes-check"
    assert obj["result"]["check_passed"] is True


def test_stokes_grade_mismatch_is_invalid_input(capsys):
    code, _, err = call(capsys, "stokes-check", "--form", "dxdy", "--domain", "cube")
    assert code == 4 and json.loads(err)["error"] == "invalid_input"


def test_missing_chain_is_usage_error(capsys):
    assert call(capsys, "winding")[0] == 2


def test_missing_file_is_io_error(capsys, tmp_path):
    code, _, err = call(capsys, "winding", "--chain", str(tmp_path / "none.json"))
    assert code == 3 and json.loads(err)["error"] == "io_error"


def test_unknown_form_is_invalid_input(capsys):
    assert call(capsys, "stokes-check", "--form", "nope")[0] == 4


def test_winding_and_cauchy(capsys, square):
    code, out, _ = call(capsys, "winding", "--chain", square, "--z", "0.1,0.1", "--integer")
    assert code == 0 and abs(json.loads(out)["result"]["value_re"] - 1) < 1e-6
    code, out, _ = call(capsys, "cauchy", "--chain", square, "--f", "exp", "--expect", "0,0", "--tol", "1e-6")
    assert code == 0
    code, _, _ = call(capsys, "cauchy", "--chain", square, "--f", "exp", "--expect", "1,0", "--tol", "1e-6")
    assert code == 1


def test_residue(capsys, tmp_path):
    path = tmp_path / "circle.json"
    cio.save_chain(path, dom.circle_chain(N=4096))
    code, out, _ = call(capsys, "residue", "--chain", str(path))
    r = json.loads(out)["result"]
    assert code == 0 and abs(r["value_im"] - 2 * math.pi) < 1e-10


def test_norm_estimate_on_dipole(capsys, tmp_path):
    path = tmp_path / "dipole.json"
    A = DiffChain(2, 0, [[1e-3, 0.0], [0.0, 0.0]], [[1e3], [-1e3]])
    cio.save_chain(path, A)
    code, out, _ = call(capsys, "norm-estimate", "--chain", str(path), "--order", "1")
    r = json.loads(out)["result"]
    assert code == 0 and 0.99 <= r["lower"] <= r["upper"] <= 1.0 + 1e-9


def test_density(capsys):
    code, out, _ = call(capsys, "density", "--seed", "3", "--z", "0.05,0.02", "--mc", "5000")
    r = json.loads(out)["result"]
    assert code == 0 and abs(r["density"] - r["winding"]) <= 3 * r["stderr"] + 1e-9


def test_asymptotic_cycle_csv(capsys, tmp_path):
    path = tmp_path / "ladder.csv"
    code, _, _ = call(capsys, "asymptotic-cycle", "--field", "linear", "--T", "40",
                      "--checkpoints", "10,20,40", "--out", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert all(l.startswith("# ") for l in lines[:4])
    body = [l for l in lines if not l.startswith("#")]
    assert body[0] == "T,dx,dy,cos2pix_dx,boundary_max" and len(body) == 4
    assert math.isclose(float(body[-1].split(",")[1]), 1.0, rel_tol=1e-9)


def test_measure_chain(capsys, tmp_path):
    code, out, _ = call(capsys, "measure-chain", "--field", "cellular", "--grid", "32",
                        "--out-chain", str(tmp_path / "xi.json"))
    r = json.loads(out)["result"]
    assert code == 0 and r["invariant"] and r["terms"] == 1024
    assert len(cio.load_chain(tmp_path / "xi.json")) > 0


def test_selftest_flags(capsys):
    code, out, _ = call(capsys, "selftest")
    assert code == 0 and all(c["ok"] for c in json.loads(out)["result"]["checks"])
    code, out, _ = call(capsys, "winding", "--selftest")
    assert code == 0 and {c["module"] for c in json.loads(out)["result"]["checks"]} == {"complex"}


def test_bad_thread_setting(capsys, monkeypatch):
    monkeypatch.setenv("CHAINCALC_THREADS", "zero")
    assert call(capsys, "selftest", "--modules", "chain")[0] == 4


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "chaincalc", "selftest", "--modules", "multivector"],
                       capture_output=True, text=True, timeout=120)
    assert p.returncode == 0 and json.loads(p.stdout)["result"]["check_passed"]


def test_io_helpers(tmp_path):
    assert json.loads(cio.dumps({"b": np.float64(1.5), "a": np.arange(2), "c": 1 + 2j})) == \
        {"a": [0, 1], "b": 1.5, "c": [1.0, 2.0]}
    P = dom.PolyhedralChain.simplex([[0, 0], [1, 0], [0, 1]])
    cio.save_chain(tmp_path / "p.json", P)
    assert cio.load_chain(tmp_path / "p.json") == P
    assert cio.csv_text(["x"], [[0.1]]) == "x\n0.1\n"
