"""Deterministic JSON/CSV input and output."""
from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .chain import DiffChain
from .domains import PolyhedralChain


def _plain(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def dumps(obj: Any) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_json(path: str | os.PathLike | None, obj: Any) -> str:
    text = dumps(obj)
    if path is None or str(path) == "-":
        return text
    Path(path).write_text(text)
    return text


def read_json(path: str | os.PathLike) -> Any:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"no such file: {p}")
    return json.loads(p.read_text())


def metadata(command: str, params: dict, seed: int | None = None) -> dict:
    return {"version": __version__, "command": command, "seed": seed, "parameters": params}


def save_chain(path, A: DiffChain | PolyhedralChain) -> str:
    obj = A.to_json()
    if isinstance(A, PolyhedralChain):
        obj["kind"] = "polyhedral"
    return write_json(path, obj)


def load_chain(path) -> DiffChain | PolyhedralChain:
    obj = read_json(path)
    if obj.get("kind") == "polyhedral" or "cells" in obj:
        return PolyhedralChain.from_json(obj)
    return DiffChain.from_json(obj)


def csv_text(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()
