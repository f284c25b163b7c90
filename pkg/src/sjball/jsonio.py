"""JSON encoding of complex arrays, parameters, points and group elements.

A complex scalar is ``[re, im]``; vectors and matrices are nested lists of
such pairs in row-major order. Plain real numbers are accepted on input.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .core import JacobiBallPoint, ModelParams, validate_ball_point


def to_json(x) -> Any:
    """Encode a complex scalar or array."""
    a = np.asarray(x, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [to_json(v) for v in a]


def from_json(obj, ndim: int) -> np.ndarray:
    """Decode an ``ndim``-dimensional complex array."""
    a = np.asarray(obj, dtype=float)
    if a.ndim == ndim + 1 and a.shape[-1] == 2:
        return a[..., 0] + 1j * a[..., 1]
    if a.ndim == ndim:
        return a.astype(complex)
    raise ValueError(f"expected a {ndim}-dimensional complex array, got shape {a.shape}")


def load(arg: str) -> Any:
    """Parse inline JSON, or read JSON from the file named by ``arg``."""
    s = arg.strip()
    if s[:1] in "{[":
        return json.loads(s)
    return json.loads(Path(arg).read_text())


def params_to_json(p: ModelParams) -> dict:
    return {"n": p.n, "k": p.k, "mu": p.mu}


def params_from_json(obj) -> ModelParams:
    return ModelParams(int(obj["n"]), float(obj["k"]), float(obj["mu"]))


def point_to_json(pt: JacobiBallPoint) -> dict:
    return {"z": to_json(pt.z), "W": to_json(pt.Wm)}


def point_from_json(obj) -> JacobiBallPoint:
    return JacobiBallPoint(from_json(obj["z"], 1), validate_ball_point(from_json(obj["W"], 2)))


def state_to_json(s) -> dict:
    return {"z": to_json(s.z), "W": to_json(s.W), "vz": to_json(s.vz), "vW": to_json(s.vW)}


def state_from_json(obj):
    from .geodesics import GeodesicState

    return GeodesicState(
        from_json(obj["z"], 1), from_json(obj["W"], 2), from_json(obj["vz"], 1), from_json(obj["vW"], 2)
    )


def group_to_json(e) -> dict:
    return {"p": to_json(e.g.p), "q": to_json(e.g.q), "alpha": to_json(e.alpha), "t": e.t}


def group_from_json(obj):
    from .group import JacobiGroupElement, SymplecticElement

    g = SymplecticElement(from_json(obj["p"], 2), from_json(obj["q"], 2))
    return JacobiGroupElement(g, from_json(obj["alpha"], 1), float(obj.get("t", 0.0)))


def dumps(obj) -> str:
    """Deterministic serialization used by the CLI."""
    return json.dumps(obj, sort_keys=True)
