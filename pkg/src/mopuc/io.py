"""JSON formats for matrices, measures and coefficient sequences.

A matrix is ``{"dim": p, "data": [[re, im], ...]}`` with ``p * p`` entries
in row-major order.  Readers also accept bare nested lists of rows.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import BadConfig
from .measure import MatrixMeasure, lambda_g, make_measure
from .opuc import VerblunskySequence


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    return {"dim": int(m.shape[0]), "data": [[float(x.real), float(x.imag)] for x in m.ravel()]}


def _entry(x) -> complex:
    if isinstance(x, (list, tuple)):
        return complex(float(x[0]), float(x[1]))
    return complex(x)


def matrix_from_json(obj, dim: int | None = None) -> np.ndarray:
    if isinstance(obj, dict):
        p = int(obj["dim"])
        data = [_entry(x) for x in obj["data"]]
        if len(data) != p * p:
            raise BadConfig(f"matrix of dim {p} needs {p * p} entries, got {len(data)}")
        m = np.array(data, dtype=complex).reshape(p, p)
    elif isinstance(obj, (int, float)):
        m = np.array([[complex(obj)]])
    else:
        rows = [[_entry(x) for x in row] for row in obj]
        m = np.array(rows, dtype=complex)
    if dim is not None and m.shape != (dim, dim):
        raise BadConfig(f"expected a {dim}x{dim} matrix, got {m.shape}")
    return m


def sequence_to_json(alpha: VerblunskySequence) -> dict:
    return {"dim": alpha.dim, "coeffs": [matrix_to_json(a) for a in alpha.coeffs]}


def sequence_from_json(obj) -> VerblunskySequence:
    p = int(obj["dim"])
    mats = [matrix_from_json(a, p) for a in obj["coeffs"]]
    return VerblunskySequence.from_list(mats, dim=p)


def measure_to_json(mu: MatrixMeasure) -> dict:
    return {
        "dim": mu.dim,
        "grid_size": mu.grid_size,
        "density": [matrix_to_json(w) for w in mu.density],
        "atoms": [{"theta": a.theta, "weight": matrix_to_json(a.weight)} for a in mu.atoms],
    }


def measure_from_json(obj, renormalize: bool = False) -> MatrixMeasure:
    """Read a measure; ``density`` may be ``"lambda0"`` or ``"lambda_g:<g>"``."""
    p = int(obj.get("dim", 1))
    M = int(obj.get("grid_size", 4096))
    dens = obj["density"]
    if isinstance(dens, str):
        if dens == "lambda0":
            base = lambda_g(0.0, p, M)
        elif dens.startswith("lambda_g:"):
            base = lambda_g(float(dens.split(":", 1)[1]), p, M)
        else:
            raise BadConfig(f"unknown builtin density {dens!r}")
        samples = base.density
    else:
        samples = np.stack([matrix_from_json(w, p) for w in dens])
        if samples.shape[0] != M:
            raise BadConfig(f"grid_size {M} but {samples.shape[0]} density samples")
    atoms = [(a["theta"], matrix_from_json(a["weight"], p)) for a in obj.get("atoms", [])]
    return make_measure(samples, atoms, renormalize=renormalize)


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def is_measure_file(obj) -> bool:
    return "density" in obj
