"""Report serialization to JSON and CSV.

JSON keeps insertion order (reports are built with a fixed key order) and
writes floats with ``repr``, which round-trips every double exactly.
Complex numbers become ``{"re": ..., "im": ...}``.  CSV is either the
eight-column comparison schema or a flattened (key, value) listing.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math

import numpy as np

from .theorem import ComparisonReport

COMPARISON_COLUMNS = ("x", "lhs", "t1", "t2", "t3", "predicted", "ratio", "Q")


def to_plain(obj):
    """Recursively convert reports to JSON-compatible builtins."""
    if isinstance(obj, ComparisonReport):
        d = {k: getattr(obj, k) for k in COMPARISON_COLUMNS}
        d["variant"] = obj.variant
        d["config"] = obj.config
        return to_plain(d)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    if v is None:
        return ""
    return str(v)


def _flatten(obj, prefix: str = ""):
    if isinstance(obj, dict):
        if set(obj) == {"re", "im"}:
            yield prefix + ".re", obj["re"]
            yield prefix + ".im", obj["im"]
            return
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else k)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _comparison_rows(report):
    """The list of ComparisonReports in a report, or None if it has none."""
    if isinstance(report, ComparisonReport):
        return [report]
    if isinstance(report, dict) and "reports" in report:
        reps = list(report["reports"])
        if all(isinstance(r, ComparisonReport) for r in reps):
            return reps
    if isinstance(report, (list, tuple)) and all(isinstance(r, ComparisonReport) for r in report):
        return list(report)
    return None


def serialize_report(report, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(to_plain(report), indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    rows = _comparison_rows(report)
    if rows is not None:
        writer.writerow(COMPARISON_COLUMNS)
        for r in rows:
            writer.writerow([_fmt(getattr(r, c)) for c in COMPARISON_COLUMNS])
        return buf.getvalue()
    writer.writerow(("key", "value"))
    for k, v in _flatten(to_plain(report)):
        writer.writerow((k, _fmt(v)))
    return buf.getvalue()


def parse_comparison_csv(text: str) -> list[dict]:
    """Read back the eight-column schema with lhs and Q as ints."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append({c: (int(row[c]) if c in ("lhs", "Q") else float(row[c])) for c in COMPARISON_COLUMNS})
    return out
