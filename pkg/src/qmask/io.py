"""JSON persistence for squares, maskers, codes, channels, state sets and reports.

Complex scalars are two-element ``[re, im]`` arrays; matrices are nested
row-major arrays of those; state vectors are flat arrays.
"""
from __future__ import annotations

import hashlib
import json
import os
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .errors import SchemaError
from .mols import LatinSquare, MolsPair

COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
STATE = {"type": "array", "items": COMPLEX, "minItems": 1}
MATRIX = {"type": "array", "items": STATE, "minItems": 1}
DIMS = {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}

SQUARE_SCHEMA = {
    "type": "object",
    "required": ["order", "cells"],
    "properties": {
        "order": {"type": "integer", "minimum": 1},
        "cells": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        "base": {"enum": [0, 1]},
    },
}

SCHEMAS: dict[str, dict] = {
    "square": SQUARE_SCHEMA,
    "pair": {
        "type": "object",
        "required": ["first", "second"],
        "properties": {"first": SQUARE_SCHEMA, "second": SQUARE_SCHEMA, "base": {"enum": [0, 1]}},
    },
    "masker": {
        "type": "object",
        "required": ["input_dim", "dims", "matrix"],
        "properties": {
            "input_dim": {"type": "integer", "minimum": 1},
            "dims": DIMS,
            "matrix": MATRIX,
            "provenance": {"type": "string"},
            "meta": {"type": "object"},
        },
    },
    "code": {
        "type": "object",
        "required": ["dims", "basis"],
        "properties": {"dims": DIMS, "basis": {"type": "array", "items": STATE, "minItems": 1}},
    },
    "channel": {
        "type": "object",
        "required": ["dims", "kraus"],
        "properties": {
            "dims": DIMS,
            "j": {"type": ["integer", "null"]},
            "name": {"type": "string"},
            "kraus": {"type": "array", "items": MATRIX, "minItems": 1},
        },
    },
    "states": {
        "type": "object",
        "required": ["states"],
        "properties": {"states": {"type": "array", "items": STATE, "minItems": 1}, "label": {"type": "string"}},
    },
}


def validate(obj: Any, kind: str) -> None:
    try:
        jsonschema.validate(obj, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        raise SchemaError(exc.message, exc.json_path) from None


def encode_complex(a) -> Any:
    """Nested lists with every scalar as ``[re, im]``."""
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def decode_complex(obj, path: str = "$") -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError("ragged or non-numeric complex array", path) from None
    if arr.ndim == 0 or arr.shape[-1] != 2:
        raise SchemaError("complex entries must be [re, im] pairs", path)
    return arr[..., 0] + 1j * arr[..., 1]


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy values; complex arrays use the pair encoding."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode_complex(obj)
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


# squares and pairs


def square_from_dict(obj: dict, base: int | None = None, path: str = "$") -> LatinSquare:
    base = obj.get("base", 0) if base is None else base
    cells = np.asarray(obj["cells"], dtype=object)
    d = obj["order"]
    if cells.ndim != 2 or cells.shape != (d, d):
        raise SchemaError(f"declared order {d} does not match cell array shape {cells.shape}", f"{path}.cells")
    cells = cells.astype(int) - base
    if cells.min() < 0 or cells.max() >= d:
        raise SchemaError(f"entries must lie in {base}..{d - 1 + base}", f"{path}.cells")
    return LatinSquare(cells)


def mols_pair_from_dict(obj: dict) -> MolsPair:
    validate(obj, "pair")
    base = obj.get("base")
    first = square_from_dict(obj["first"], base, "$.first")
    second = square_from_dict(obj["second"], base, "$.second")
    if first.order != second.order:
        raise SchemaError("squares have different orders", "$.second.order")
    return MolsPair(first, second)


def mols_pair_to_dict(pair: MolsPair) -> dict:
    return pair.to_dict()


# maskers


def masker_to_dict(s) -> dict:
    return {
        "input_dim": s.input_dim,
        "dims": list(s.dims),
        "matrix": encode_complex(s.matrix),
        "provenance": s.provenance,
        "meta": to_jsonable(s.meta),
    }


def masker_from_dict(obj: dict):
    from .masker import Masker

    validate(obj, "masker")
    mat = decode_complex(obj["matrix"], "$.matrix")
    if mat.ndim != 2:
        raise SchemaError("matrix rows have unequal lengths", "$.matrix")
    size = int(np.prod(obj["dims"]))
    if mat.shape != (size, obj["input_dim"]):
        raise SchemaError(f"matrix shape {mat.shape} does not match ({size}, {obj['input_dim']})", "$.matrix")
    return Masker(mat, tuple(obj["dims"]), obj.get("provenance", "user"), obj.get("meta", {}))


# codes, channels, state sets


def code_to_dict(code) -> dict:
    return {"dims": list(code.dims), "basis": encode_complex(code.basis.T)}


def code_from_dict(obj: dict):
    from .erasure import CodeSubspace

    validate(obj, "code")
    basis = decode_complex(obj["basis"], "$.basis")
    size = int(np.prod(obj["dims"]))
    if basis.ndim != 2 or basis.shape[1] != size:
        raise SchemaError(f"basis vectors must have length {size}", "$.basis")
    return CodeSubspace(tuple(obj["dims"]), basis.T)


def channel_to_dict(ch) -> dict:
    return {"dims": list(ch.dims), "j": ch.j, "name": ch.name, "kraus": [encode_complex(k) for k in ch.kraus]}


def channel_from_dict(obj: dict):
    from .erasure import KrausChannel

    validate(obj, "channel")
    size = int(np.prod(obj["dims"]))
    ops = []
    for i, k in enumerate(obj["kraus"]):
        m = decode_complex(k, f"$.kraus[{i}]")
        if m.shape != (size, size):
            raise SchemaError(f"Kraus operator must be {size}x{size}", f"$.kraus[{i}]")
        ops.append(m)
    return KrausChannel(tuple(ops), tuple(obj["dims"]), obj.get("j"), obj.get("name", "custom"))


def states_to_dict(q) -> dict:
    return {"states": encode_complex(q.states), "label": q.label}


def states_from_dict(obj: dict):
    from .verifier import StateSet

    validate(obj, "states")
    states = decode_complex(obj["states"], "$.states")
    if states.ndim != 2:
        raise SchemaError("states have unequal lengths", "$.states")
    return StateSet(states, obj.get("label", ""))


LOADERS = {
    "pair": mols_pair_from_dict,
    "masker": masker_from_dict,
    "code": code_from_dict,
    "channel": channel_from_dict,
    "states": states_from_dict,
}


def load(path: str | os.PathLike, kind: str):
    """Read and validate an artifact of the given kind."""
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    return LOADERS[kind](obj)


def dumps(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), indent=1, sort_keys=False) + "\n"


def store(path: str | os.PathLike, payload: Any) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    path.write_text(dumps(payload))
    return path


def file_sha256(path: str | os.PathLike) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    argv: list[str]
    version: str
    seeds: dict[str, int] = field(default_factory=dict)
    inputs: dict[str, str] = field(default_factory=dict)  # path -> sha256
    outputs: list[str] = field(default_factory=list)
    started: float = field(default_factory=time.time)
    wall_time: float | None = None

    def add_input(self, path) -> None:
        self.inputs[str(path)] = file_sha256(path)

    def finish(self) -> dict:
        self.wall_time = time.time() - self.started
        return {
            "command": self.argv,
            "version": self.version,
            "python": sys.version.split()[0],
            "platform": platform.platform(),
            "seeds": self.seeds,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "wall_time": self.wall_time,
        }
