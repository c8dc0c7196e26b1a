"""Run reports and their JSON / CSV serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .scenario import SCHEMA_VERSION

CSV_COLUMNS = ("N", "lower", "upper", "residual", "numerically_zero", "verdict")


@dataclass
class RunReport:
    """Everything a run produced; field order is the serialization order."""

    command: str
    scenario: dict
    seed: int
    prng: str
    rows: list = field(default_factory=list)
    sections: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    timing: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "scenario": self.scenario,
            "seed": self.seed,
            "prng": self.prng,
            "rows": self.rows,
            "sections": self.sections,
            "errors": self.errors,
        }
        if self.timing is not None:
            out["timing"] = self.timing
        return plain(out)


def plain(obj: Any) -> Any:
    """Convert to JSON-native types: arrays to lists, complex to [re, im], NaN/inf to None."""
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [plain(float(obj.real)), plain(float(obj.imag))]
    return obj


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def emit_report(report: RunReport, fmt: str = "json") -> bytes:
    """Serialize deterministically. CSV carries the per-N rows only."""
    if fmt == "json":
        text = json.dumps(report.to_dict(), indent=2, allow_nan=False) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in plain(report.rows):
            writer.writerow([_fmt(row.get(col)) for col in CSV_COLUMNS])
        text = buf.getvalue()
    else:
        raise ValueError(f"unknown report format {fmt!r}; expected 'json' or 'csv'")
    return text.encode("utf-8")
