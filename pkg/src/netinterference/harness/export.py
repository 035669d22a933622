"""Deterministic table export (CSV / JSON)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

SIG_DIGITS = 12


def _fmt(v: Any) -> Any:
    """Round floats to 12 significant digits; non-finite floats become strings."""
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, float) or hasattr(v, "dtype"):
        x = float(v)
        if not math.isfinite(x):
            return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(v, dict):
        return {str(k): _fmt(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_fmt(x) for x in v]
    return str(v)


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row has {len(r)} fields, expected {len(self.columns)}")

    def records(self) -> list[dict[str, Any]]:
        return [dict(zip(self.columns, r)) for r in self.rows]

    def column(self, name: str) -> list[Any]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def normalized(self) -> "ResultTable":
        return ResultTable(list(self.columns), [[_fmt(v) for v in r] for r in self.rows], _fmt(self.metadata))


def table_to_json(table: ResultTable) -> str:
    t = table.normalized()
    return json.dumps({"columns": t.columns, "rows": t.rows, "metadata": t.metadata},
                      sort_keys=True, indent=1) + "\n"


def table_to_csv(table: ResultTable) -> str:
    t = table.normalized()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(t.columns)
    for r in t.rows:
        w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in r])
    return buf.getvalue()


def export(table: ResultTable, path, fmt: str = "json") -> Path:
    """Write ``table`` to ``path``; CSV output gets a ``.meta.json`` sidecar for metadata."""
    path = Path(path)
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    text = table_to_csv(table) if fmt == "csv" else table_to_json(table)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        if fmt == "csv" and table.metadata:
            path.with_suffix(".meta.json").write_text(
                json.dumps(table.normalized().metadata, sort_keys=True, indent=1) + "\n")
    except OSError as exc:
        raise OSError(f"could not write results to {path}: {exc}") from exc
    return path


def _parse_cell(s: str) -> Any:
    if s == "":
        return None
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    if s in ("True", "False"):
        return s == "True"
    return s


def load_table(path) -> ResultTable:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        d = json.loads(text)
        return ResultTable(d["columns"], d["rows"], d.get("metadata", {}))
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = [[_parse_cell(c) for c in r] for r in reader]
    meta_path = path.with_suffix(".meta.json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return ResultTable(header, rows, meta)


def quantile_summary(values: Sequence[float], qs=(5, 25, 50, 75, 95)) -> dict[str, float]:
    v = np.asarray([x for x in values if x is not None and math.isfinite(x)], dtype=float)
    if v.size == 0:
        return {f"q{q}": float("nan") for q in qs} | {"mean": float("nan"), "sd": float("nan"), "n": 0}
    out = {f"q{q}": float(np.percentile(v, q)) for q in qs}
    out.update(mean=float(v.mean()), sd=float(v.std(ddof=1)) if v.size > 1 else 0.0, n=int(v.size))
    return out
