"""Report containers shared by the checkers and the CLI."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, fields, is_dataclass
from typing import Any, Optional

import numpy as np


def plain(obj):
    """Recursively convert numpy scalars/arrays and dataclasses to JSON types."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: plain(getattr(obj, f.name)) for f in fields(obj) if not f.name.startswith("_")}
    if isinstance(obj, dict):
        return {str(k): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


@dataclass
class Report:
    """Per-record measurements against required bounds.

    ``passed`` is true iff every record passed; ``worst`` is the record with
    the smallest margin (first in grid order on ties).
    """

    kind: str
    records: list
    passed: bool = True
    worst: Optional[Any] = None
    summary: dict = field(default_factory=dict)

    def finalize(self) -> "Report":
        self.passed = all(r.passed for r in self.records)
        if self.records:
            self.worst = min(self.records, key=lambda r: r.margin)
        return self

    def to_dict(self) -> dict:
        return plain(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        rows = [plain(r) for r in self.records]
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in row.items()})
        return buf.getvalue()


def render(report, fmt: str = "json") -> str:
    if fmt == "csv":
        return report.to_csv()
    return report.to_json() if hasattr(report, "to_json") else json.dumps(plain(report), indent=2)
