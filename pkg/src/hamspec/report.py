"""Machine-readable reports with a stable field order."""

from __future__ import annotations

import json
import math
import platform
from dataclasses import asdict, dataclass, field, fields
from typing import Any

import numpy as np
import scipy

from .tolerances import Tolerances

REPORT_VERSION = 1


def jsonable(value: Any) -> Any:
    """Plain JSON data for numpy scalars, arrays and complex numbers.

    Complex values become ``[re, im]``; non-finite floats become the strings
    ``"nan"``, ``"inf"`` and ``"-inf"``.
    """
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [jsonable(float(value.real)), jsonable(float(value.imag))]
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return value


def environment(tol: Tolerances | None = None, seed: int | None = None) -> dict:
    from . import __version__

    env = {
        "package": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }
    if tol is not None:
        env["tolerances"] = {f.name: getattr(tol, f.name) for f in fields(tol)}
    if seed is not None:
        env["seed"] = seed
    return env


@dataclass
class Report:
    command: str
    problem: str = ""
    verdict: str = "OK"
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    environment: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    report_version: int = REPORT_VERSION

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {"report_version": self.report_version}
        for key in ("command", "problem", "verdict", "records", "summary", "errors", "environment"):
            out[key] = jsonable(getattr(self, key))
        if include_timing:
            out["timing"] = jsonable(self.timing)
        return out

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown report fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    def normalized(self) -> "Report":
        """The report as it reads back from JSON."""
        return Report.from_json(self.to_json())


def record_dict(rec) -> dict:
    """Serializable view of an eigenvalue record or a per-root failure."""
    out = rec.summary()
    basis = getattr(rec, "eigenbasis", None)
    if basis is not None:
        out["eigenbasis"] = [jsonable(basis[:, i]) for i in range(basis.shape[1])]
    return out


def write_report(report: Report, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())


def as_plain(obj) -> dict:
    """``dataclasses.asdict`` passed through :func:`jsonable`."""
    return jsonable(asdict(obj))
