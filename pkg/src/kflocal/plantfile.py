"""JSON plant description files.

A plant file looks like::

    {
      "a_hat": {"coeffs": [[0, 0], [0, 0], [-1, 0]]},
      "b_hat": {"num": {"coeffs": [[1, 0]]}, "den": {"coeffs": [[1, 0]]}},
      "g_hat": {"num": {"coeffs": [[1, 0]]}, "den": {"coeffs": [[1, 0], [0, 2]]}},
      "labels": {"name": "diffusion, correlated measurement noise"}
    }

Coefficients are in ascending degree, each a ``[re, im]`` pair (a bare
number is accepted as a real coefficient).  ``c_hat`` is optional and
defaults to the constant one; a rational symbol may omit ``den``.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .errors import InputError
from .symbols import PlantSpec, Polynomial, RationalSymbol

__all__ = ["PLANT_SCHEMA", "load_plant", "parse_plant", "plant_to_dict", "dump_plant"]

_COEFF = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_POLY = {
    "type": "object",
    "properties": {"coeffs": {"type": "array", "items": _COEFF}},
    "required": ["coeffs"],
    "additionalProperties": False,
}
_RATIONAL = {
    "type": "object",
    "properties": {"num": _POLY, "den": _POLY},
    "required": ["num"],
    "additionalProperties": False,
}
PLANT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "a_hat": _POLY,
        "b_hat": _RATIONAL,
        "c_hat": _RATIONAL,
        "g_hat": _RATIONAL,
        "labels": {"type": "object"},
        "units": {"type": "object"},
    },
    "required": ["a_hat", "b_hat", "g_hat"],
    "additionalProperties": False,
}


def _poly(d):
    return Polynomial([complex(c[0], c[1]) if isinstance(c, list) else c for c in d["coeffs"]])


def _rational(d):
    den = _poly(d["den"]) if "den" in d else Polynomial([1.0])
    return RationalSymbol(_poly(d["num"]), den)


def parse_plant(doc: dict) -> PlantSpec:
    """Build a :class:`PlantSpec` from a decoded plant document."""
    try:
        jsonschema.validate(doc, PLANT_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise InputError(f"plant file invalid at {where}: {exc.message}") from None
    c_hat = _rational(doc["c_hat"]) if "c_hat" in doc else RationalSymbol(Polynomial([1.0]))
    return PlantSpec(_poly(doc["a_hat"]), _rational(doc["b_hat"]), c_hat, _rational(doc["g_hat"]),
                     labels=doc.get("labels", {}), units=doc.get("units", {}))


def load_plant(path) -> PlantSpec:
    """Read and validate a plant file.

    Raises
    ------
    InputError
        For unreadable files, JSON syntax errors (with line and column) and
        schema violations (with the offending path).
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_plant(doc)


def _coeffs(p: Polynomial):
    return [[float(complex(c).real), float(complex(c).imag)] for c in p.coeffs]


def plant_to_dict(p: PlantSpec) -> dict:
    def rat(r):
        return {"num": {"coeffs": _coeffs(r.num)}, "den": {"coeffs": _coeffs(r.den)}}

    out = {"a_hat": {"coeffs": _coeffs(p.a_hat)}, "b_hat": rat(p.b_hat),
           "c_hat": rat(p.c_hat), "g_hat": rat(p.g_hat)}
    if p.labels:
        out["labels"] = dict(p.labels)
    if p.units:
        out["units"] = dict(p.units)
    return out


def dump_plant(p: PlantSpec, path) -> None:
    Path(path).write_text(json.dumps(plant_to_dict(p), indent=2, sort_keys=True) + "\n")
