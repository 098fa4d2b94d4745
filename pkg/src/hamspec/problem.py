"""JSON problem documents.

A document has five top-level keys::

    {
      "format_version": 1,
      "metadata": {"name": "...", "description": "..."},
      "system": {...},
      "bc": {...},
      "solver": {"region": {...}, "tolerances": {...}}
    }

Complex numbers are written either as plain JSON numbers or as ``[re, im]``
pairs; matrices are row-major nested lists. Parsing is strict: unknown keys
and wrong types raise :class:`ProblemParseError` carrying a JSON pointer to
the offending value. Semantic checks (Hermitian, PSD, self-adjoint BC) are
left to the validators.

System block, continuous::

    {"kind": "continuous", "m": 1, "interval": [0, 3.14159], "anchor": 0.0,
     "P": <coefficient>, "W": <coefficient>}

where a coefficient is a matrix (constant), or one of::

    {"type": "constant", "value": <matrix>}
    {"type": "samples", "start": a, "stop": b, "interpolation": "linear" | "cubic",
     "values": [<matrix>, ...]}
    {"type": "piecewise", "breaks": [t0, ..., tk], "pieces": [[<matrix>, ...], ...]}

System block, discrete::

    {"kind": "discrete", "m": 1, "window": [0, 4], "anchor": 0,
     "A": <sequence>, "B": ..., "C": ..., "W1": ..., "W2": ...}

where a sequence is a matrix (constant in n), or one of::

    {"type": "constant", "value": <matrix>}
    {"type": "values", "values": [<matrix>, ...]}          # one per n in the window
    {"type": "overrides", "default": <matrix>, "overrides": {"3": <matrix>}}

Boundary block: ``{"coordinates": "standard" | "bracket", "M": <matrix>, "N": <matrix>}``
or ``{"constructor": "dirichlet" | "neumann" | "periodic" | "separated" |
"twisted_periodic", "params": {...}}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .bc import BRACKET, CONSTRUCTORS, STANDARD, BoundaryCondition
from .coefficients import ConstantCoefficient, GridCoefficient, PiecewisePolynomial
from .errors import InputError, ProblemParseError
from .spectral import SearchRegion
from .system import ContinuousSystem, DiscreteSystem, SystemSpec
from .tolerances import DEFAULT_TOLERANCES, Tolerances

FORMAT_VERSION = 1

Matrix = tuple  # tuple of rows, each a tuple of complex


# --------------------------------------------------------------------------
# low-level readers


def _ptr(path: str, key) -> str:
    key = str(key).replace("~", "~0").replace("/", "~1")
    return f"{path}/{key}"


def _object(value, path: str, required: set[str], optional: set[str] = frozenset()) -> dict:
    if not isinstance(value, dict):
        raise ProblemParseError(path, "expected an object")
    for key in value:
        if key not in required and key not in optional:
            raise ProblemParseError(_ptr(path, key), "unknown key")
    for key in sorted(required):
        if key not in value:
            raise ProblemParseError(_ptr(path, key), "missing required key")
    return value


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProblemParseError(path, f"expected a number, got {json.dumps(value)}")
    x = float(value)
    if not math.isfinite(x):
        raise ProblemParseError(path, "number must be finite")
    return x


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ProblemParseError(path, f"expected an integer, got {json.dumps(value)}")
    return value


def _string(value, path: str) -> str:
    if not isinstance(value, str):
        raise ProblemParseError(path, "expected a string")
    return value


def _complex(value, path: str) -> complex:
    if isinstance(value, list):
        if len(value) != 2:
            raise ProblemParseError(path, "complex numbers are [re, im] pairs")
        return complex(_number(value[0], _ptr(path, 0)), _number(value[1], _ptr(path, 1)))
    return complex(_number(value, path))


def _matrix(value, path: str, size: int | None = None) -> Matrix:
    if not isinstance(value, list) or not value:
        raise ProblemParseError(path, "expected a non-empty matrix (list of rows)")
    rows = []
    for i, row in enumerate(value):
        rp = _ptr(path, i)
        if not isinstance(row, list):
            raise ProblemParseError(rp, "expected a row (list of entries)")
        rows.append(tuple(_complex(x, _ptr(rp, j)) for j, x in enumerate(row)))
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ProblemParseError(_ptr(path, i), "rows have different lengths")
    if len(rows) != width:
        raise ProblemParseError(path, f"matrix must be square, got {len(rows)}x{width}")
    if size is not None and width != size:
        raise ProblemParseError(path, f"matrix must be {size}x{size}, got {width}x{width}")
    return tuple(rows)


def _matrix_list(value, path: str, size: int) -> tuple:
    if not isinstance(value, list) or not value:
        raise ProblemParseError(path, "expected a non-empty list of matrices")
    return tuple(_matrix(x, _ptr(path, i), size) for i, x in enumerate(value))


def _pair(value, path: str, reader) -> tuple:
    if not isinstance(value, list) or len(value) != 2:
        raise ProblemParseError(path, "expected a two-element list")
    return reader(value[0], _ptr(path, 0)), reader(value[1], _ptr(path, 1))


def _encode_complex(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _encode_matrix(M) -> list:
    return [[_encode_complex(x) for x in row] for row in M]


def _as_array(M) -> np.ndarray:
    return np.array(M, dtype=complex)


# --------------------------------------------------------------------------
# blocks


def _coefficient(value, path: str, size: int) -> dict:
    if isinstance(value, list):
        return {"type": "constant", "value": _matrix(value, path, size)}
    kind = _object(value, path, {"type"}, {"value", "start", "stop", "interpolation", "values", "breaks", "pieces"})["type"]
    if kind == "constant":
        _object(value, path, {"type", "value"})
        return {"type": "constant", "value": _matrix(value["value"], _ptr(path, "value"), size)}
    if kind == "samples":
        _object(value, path, {"type", "start", "stop", "values"}, {"interpolation"})
        interp = _string(value.get("interpolation", "linear"), _ptr(path, "interpolation"))
        if interp not in ("linear", "cubic"):
            raise ProblemParseError(_ptr(path, "interpolation"), "must be 'linear' or 'cubic'")
        return {
            "type": "samples",
            "start": _number(value["start"], _ptr(path, "start")),
            "stop": _number(value["stop"], _ptr(path, "stop")),
            "interpolation": interp,
            "values": _matrix_list(value["values"], _ptr(path, "values"), size),
        }
    if kind == "piecewise":
        _object(value, path, {"type", "breaks", "pieces"})
        bp = _ptr(path, "breaks")
        if not isinstance(value["breaks"], list):
            raise ProblemParseError(bp, "expected a list of numbers")
        breaks = tuple(_number(x, _ptr(bp, i)) for i, x in enumerate(value["breaks"]))
        pp = _ptr(path, "pieces")
        if not isinstance(value["pieces"], list):
            raise ProblemParseError(pp, "expected a list of pieces")
        pieces = tuple(_matrix_list(p, _ptr(pp, i), size) for i, p in enumerate(value["pieces"]))
        if len({len(p) for p in pieces}) > 1:
            raise ProblemParseError(pp, "all pieces must have the same number of power coefficients")
        return {"type": "piecewise", "breaks": breaks, "pieces": pieces}
    raise ProblemParseError(_ptr(path, "type"), f"unknown coefficient type {kind!r}")


def _sequence(value, path: str, size: int) -> dict:
    if isinstance(value, list):
        return {"type": "constant", "value": _matrix(value, path, size)}
    kind = _object(value, path, {"type"}, {"value", "values", "default", "overrides"})["type"]
    if kind == "constant":
        _object(value, path, {"type", "value"})
        return {"type": "constant", "value": _matrix(value["value"], _ptr(path, "value"), size)}
    if kind == "values":
        _object(value, path, {"type", "values"})
        return {"type": "values", "values": _matrix_list(value["values"], _ptr(path, "values"), size)}
    if kind == "overrides":
        _object(value, path, {"type", "default", "overrides"})
        op = _ptr(path, "overrides")
        if not isinstance(value["overrides"], dict):
            raise ProblemParseError(op, "expected an object keyed by integer n")
        over = {}
        for key, mat in value["overrides"].items():
            try:
                n = int(key)
            except ValueError:
                raise ProblemParseError(_ptr(op, key), "keys must be integers") from None
            over[n] = _matrix(mat, _ptr(op, key), size)
        return {
            "type": "overrides",
            "default": _matrix(value["default"], _ptr(path, "default"), size),
            "overrides": tuple(sorted(over.items())),
        }
    raise ProblemParseError(_ptr(path, "type"), f"unknown sequence type {kind!r}")


def _system(value, path: str) -> dict:
    kind = _object(value, path, {"kind"}, {"m", "interval", "window", "anchor", "P", "W", "A", "B", "C", "W1", "W2"})["kind"]
    if kind == "continuous":
        _object(value, path, {"kind", "m", "interval", "P", "W"}, {"anchor"})
        m = _integer(value["m"], _ptr(path, "m"))
        if m < 1:
            raise ProblemParseError(_ptr(path, "m"), "m must be positive")
        out = {
            "kind": kind,
            "m": m,
            "interval": _pair(value["interval"], _ptr(path, "interval"), _number),
            "anchor": None if value.get("anchor") is None else _number(value["anchor"], _ptr(path, "anchor")),
        }
        for name in ("P", "W"):
            out[name] = _coefficient(value[name], _ptr(path, name), 2 * m)
        return out
    if kind == "discrete":
        _object(value, path, {"kind", "m", "window", "A", "B", "C", "W1", "W2"}, {"anchor"})
        m = _integer(value["m"], _ptr(path, "m"))
        if m < 1:
            raise ProblemParseError(_ptr(path, "m"), "m must be positive")
        out = {
            "kind": kind,
            "m": m,
            "window": _pair(value["window"], _ptr(path, "window"), _integer),
            "anchor": None if value.get("anchor") is None else _integer(value["anchor"], _ptr(path, "anchor")),
        }
        for name in ("A", "B", "C", "W1", "W2"):
            out[name] = _sequence(value[name], _ptr(path, name), m)
        return out
    raise ProblemParseError(_ptr(path, "kind"), f"kind must be 'continuous' or 'discrete', got {kind!r}")


_CONSTRUCTOR_PARAMS = {
    "dirichlet": set(),
    "neumann": set(),
    "periodic": set(),
    "separated": {"S_a", "S_b"},
    "twisted_periodic": {"gamma", "K"},
}


def _bc(value, path: str, m: int) -> dict:
    if isinstance(value, dict) and "constructor" in value:
        _object(value, path, {"constructor"}, {"params"})
        name = _string(value["constructor"], _ptr(path, "constructor"))
        if name not in _CONSTRUCTOR_PARAMS:
            raise ProblemParseError(_ptr(path, "constructor"), f"unknown constructor {name!r}")
        pp = _ptr(path, "params")
        params = value.get("params", {})
        allowed = _CONSTRUCTOR_PARAMS[name]
        required = {"S_a", "S_b"} if name == "separated" else set()
        _object(params, pp, required, allowed)
        out = {}
        for key in sorted(params):
            if key == "gamma":
                out[key] = _number(params[key], _ptr(pp, key))
            else:
                size = 2 * m if key == "K" else m
                out[key] = _matrix(params[key], _ptr(pp, key), size)
        return {"constructor": name, "params": out}
    _object(value, path, {"M", "N"}, {"coordinates"})
    coords = _string(value.get("coordinates", STANDARD), _ptr(path, "coordinates"))
    if coords not in (STANDARD, BRACKET):
        raise ProblemParseError(_ptr(path, "coordinates"), "must be 'standard' or 'bracket'")
    return {
        "coordinates": coords,
        "M": _matrix(value["M"], _ptr(path, "M"), 2 * m),
        "N": _matrix(value["N"], _ptr(path, "N"), 2 * m),
    }


_REGION_KEYS = {"lam_min", "lam_max", "half_height", "max_depth", "samples_per_edge", "max_refinement"}
_TOL_KEYS = {f for f in DEFAULT_TOLERANCES.__dataclass_fields__}


def _solver(value, path: str) -> dict:
    _object(value, path, set(), {"region", "tolerances"})
    out = {"region": None, "tolerances": ()}
    if "region" in value:
        rp = _ptr(path, "region")
        reg = _object(value["region"], rp, {"lam_min", "lam_max"}, _REGION_KEYS)
        parsed = {}
        for key in sorted(reg):
            reader = _integer if key in ("max_depth", "samples_per_edge", "max_refinement") else _number
            parsed[key] = reader(reg[key], _ptr(rp, key))
        out["region"] = tuple(sorted(parsed.items()))
    if "tolerances" in value:
        tp = _ptr(path, "tolerances")
        tol = _object(value["tolerances"], tp, set(), _TOL_KEYS)
        out["tolerances"] = tuple(sorted((k, _number(v, _ptr(tp, k))) for k, v in tol.items()))
    return out


# --------------------------------------------------------------------------
# document


@dataclass(frozen=True)
class ProblemDocument:
    """A parsed problem file; all values normalized to hashable Python types."""

    system: dict
    bc: dict
    solver: dict = field(default_factory=lambda: {"region": None, "tolerances": ()})
    metadata: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    @property
    def name(self) -> str:
        return self.metadata.get("name", "")

    @property
    def m(self) -> int:
        return self.system["m"]

    @property
    def kind(self) -> str:
        return self.system["kind"]

    def build_system(self) -> SystemSpec:
        return build_system(self.system)

    def build_bc(self) -> BoundaryCondition:
        return build_bc(self.bc, self.m)

    def tolerances(self) -> Tolerances:
        return DEFAULT_TOLERANCES.updated(**dict(self.solver["tolerances"]))

    def region(self) -> SearchRegion | None:
        reg = self.solver["region"]
        return None if reg is None else SearchRegion(**dict(reg))


def parse_problem(text: str | bytes) -> ProblemDocument:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemParseError("", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return from_dict(raw)


def from_dict(raw: Any) -> ProblemDocument:
    _object(raw, "", {"format_version", "system", "bc"}, {"metadata", "solver"})
    version = _integer(raw["format_version"], "/format_version")
    if version != FORMAT_VERSION:
        raise ProblemParseError("/format_version", f"unsupported format version {version}")
    system = _system(raw["system"], "/system")
    bc = _bc(raw["bc"], "/bc", system["m"])
    solver = _solver(raw.get("solver", {}), "/solver")
    meta_raw = _object(raw.get("metadata", {}), "/metadata", set(), {"name", "description"})
    metadata = {k: _string(v, f"/metadata/{k}") for k, v in sorted(meta_raw.items())}
    return ProblemDocument(system, bc, solver, metadata, version)


def load_problem(path) -> ProblemDocument:
    with open(path, "rb") as fh:
        return parse_problem(fh.read())


def _encode_coefficient(c: dict):
    if c["type"] == "constant":
        return {"type": "constant", "value": _encode_matrix(c["value"])}
    if c["type"] == "samples":
        return {
            "type": "samples",
            "start": c["start"],
            "stop": c["stop"],
            "interpolation": c["interpolation"],
            "values": [_encode_matrix(x) for x in c["values"]],
        }
    return {
        "type": "piecewise",
        "breaks": list(c["breaks"]),
        "pieces": [[_encode_matrix(x) for x in p] for p in c["pieces"]],
    }


def _encode_sequence(s: dict):
    if s["type"] == "constant":
        return {"type": "constant", "value": _encode_matrix(s["value"])}
    if s["type"] == "values":
        return {"type": "values", "values": [_encode_matrix(x) for x in s["values"]]}
    return {
        "type": "overrides",
        "default": _encode_matrix(s["default"]),
        "overrides": {str(n): _encode_matrix(x) for n, x in s["overrides"]},
    }


def to_dict(doc: ProblemDocument) -> dict:
    sysb = doc.system
    if sysb["kind"] == "continuous":
        system = {"kind": "continuous", "m": sysb["m"], "interval": list(sysb["interval"])}
        if sysb["anchor"] is not None:
            system["anchor"] = sysb["anchor"]
        system.update({k: _encode_coefficient(sysb[k]) for k in ("P", "W")})
    else:
        system = {"kind": "discrete", "m": sysb["m"], "window": list(sysb["window"])}
        if sysb["anchor"] is not None:
            system["anchor"] = sysb["anchor"]
        system.update({k: _encode_sequence(sysb[k]) for k in ("A", "B", "C", "W1", "W2")})
    if "constructor" in doc.bc:
        params = {
            k: (v if k == "gamma" else _encode_matrix(v)) for k, v in doc.bc["params"].items()
        }
        bc = {"constructor": doc.bc["constructor"], "params": params}
    else:
        bc = {
            "coordinates": doc.bc["coordinates"],
            "M": _encode_matrix(doc.bc["M"]),
            "N": _encode_matrix(doc.bc["N"]),
        }
    out = {"format_version": doc.format_version}
    if doc.metadata:
        out["metadata"] = dict(doc.metadata)
    out["system"] = system
    out["bc"] = bc
    solver = {}
    if doc.solver["region"] is not None:
        solver["region"] = dict(doc.solver["region"])
    if doc.solver["tolerances"]:
        solver["tolerances"] = dict(doc.solver["tolerances"])
    if solver:
        out["solver"] = solver
    return out


def serialize_problem(doc: ProblemDocument) -> str:
    return json.dumps(to_dict(doc), indent=2) + "\n"


# --------------------------------------------------------------------------
# building model objects


def _build_coefficient(c: dict):
    if c["type"] == "constant":
        return ConstantCoefficient(_as_array(c["value"]))
    if c["type"] == "samples":
        return GridCoefficient(c["start"], c["stop"], _as_array(c["values"]), c["interpolation"])
    return PiecewisePolynomial(c["breaks"], _as_array(c["pieces"]))


def _build_sequence(s: dict, window: tuple[int, int]):
    if s["type"] == "constant":
        return _as_array(s["value"])
    if s["type"] == "values":
        return _as_array(s["values"])
    lo, hi = window
    over = dict(s["overrides"])
    default = _as_array(s["default"])
    return {n: _as_array(over[n]) if n in over else default for n in range(lo, hi + 1)}


def build_system(block: dict) -> SystemSpec:
    if block["kind"] == "continuous":
        return ContinuousSystem(
            block["m"],
            block["interval"],
            _build_coefficient(block["P"]),
            _build_coefficient(block["W"]),
            block["anchor"],
        )
    window = block["window"]
    seqs = {k: _build_sequence(block[k], window) for k in ("A", "B", "C", "W1", "W2")}
    return DiscreteSystem(block["m"], window, anchor=block["anchor"], **seqs)


def build_bc(block: dict, m: int) -> BoundaryCondition:
    if "constructor" in block:
        name = block["constructor"]
        params = {k: (v if k == "gamma" else _as_array(v)) for k, v in block["params"].items()}
        if name == "separated":
            return CONSTRUCTORS[name](params["S_a"], params["S_b"])
        if name == "twisted_periodic":
            K = params.get("K")
            return CONSTRUCTORS[name](params.get("gamma", 0.0), None if K is None else K.real, m)
        return CONSTRUCTORS[name](m)
    return BoundaryCondition(m, _as_array(block["M"]), _as_array(block["N"]), block["coordinates"], "document")


def document_from_model(
    spec: SystemSpec,
    bc: BoundaryCondition,
    region: SearchRegion | None = None,
    name: str = "",
    description: str = "",
) -> ProblemDocument:
    """Problem document for constant-coefficient or tabulated model objects."""

    def mat(X):
        return tuple(tuple(complex(x) for x in row) for row in np.asarray(X))

    if isinstance(spec, ContinuousSystem):
        coeffs = {}
        for key in ("P", "W"):
            c = getattr(spec, key)
            if isinstance(c, ConstantCoefficient):
                coeffs[key] = {"type": "constant", "value": mat(c.matrix)}
            elif isinstance(c, GridCoefficient):
                coeffs[key] = {
                    "type": "samples",
                    "start": c.start,
                    "stop": c.stop,
                    "interpolation": c.interpolation,
                    "values": tuple(mat(x) for x in c.samples),
                }
            elif isinstance(c, PiecewisePolynomial):
                coeffs[key] = {
                    "type": "piecewise",
                    "breaks": tuple(float(x) for x in c.breaks),
                    "pieces": tuple(tuple(mat(x) for x in p) for p in c.pieces),
                }
            else:
                raise InputError(f"coefficient {key} cannot be written to a document")
        system = {"kind": "continuous", "m": spec.m, "interval": spec.interval, "anchor": spec.anchor, **coeffs}
    else:
        seqs = {k: {"type": "values", "values": tuple(mat(x) for x in getattr(spec, k))} for k in ("A", "B", "C", "W1", "W2")}
        system = {"kind": "discrete", "m": spec.m, "window": spec.window, "anchor": spec.anchor, **seqs}
    bc_block = {"coordinates": bc.coordinate_tag, "M": mat(bc.M), "N": mat(bc.N)}
    solver = {"region": None, "tolerances": ()}
    if region is not None:
        solver["region"] = tuple(
            sorted(
                {
                    "lam_min": region.lam_min,
                    "lam_max": region.lam_max,
                    "half_height": region.half_height,
                }.items()
            )
        )
    meta = {k: v for k, v in (("description", description), ("name", name)) if v}
    return from_dict(json.loads(json.dumps(to_dict(ProblemDocument(system, bc_block, solver, meta)))))
