"""Deterministic CSV and JSON table writers.

Floats are written with ``%.17g`` so reruns are byte-identical and values
round-trip exactly.  Missing values are ``NaN`` in CSV and ``null`` in JSON.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__


@dataclass
class Table:
    name: str
    columns: list
    data: dict  # column -> 1-D array
    units: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.data.values()))) if self.data else 0

    def nan_count(self) -> int:
        return int(sum(np.count_nonzero(~np.isfinite(np.asarray(self.data[c], dtype=float)))
                       for c in self.columns))


def fmt(x) -> str:
    x = float(x)
    return "NaN" if math.isnan(x) else "%.17g" % x


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (float, np.floating)):
        return None if not math.isfinite(float(x)) else float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _meta_lines(meta: dict) -> list:
    return [f"# {k}: {json.dumps(_jsonable(meta[k]), sort_keys=True)}" for k in sorted(meta)]


def csv_text(table: Table) -> str:
    lines = _meta_lines(table.meta)
    if table.units:
        lines.append("# units: " + ", ".join(f"{c}={table.units.get(c, '1')}" for c in table.columns))
    lines.append(",".join(table.columns))
    cols = [np.asarray(table.data[c], dtype=float) for c in table.columns]
    for row in zip(*cols):
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def json_document(tables: list, metadata: dict) -> str:
    doc = {
        "metadata": _jsonable({"tool": "atomloc", "version": __version__, **metadata}),
        "tables": [
            {"name": t.name, "columns": t.columns, "units": t.units,
             "meta": _jsonable(t.meta), "nan_count": t.nan_count(),
             "data": {c: _jsonable(np.asarray(t.data[c], dtype=float)) for c in t.columns}}
            for t in tables
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=1, allow_nan=False) + "\n"


def _write(path: Path, text: str):
    # OSError propagates; callers add path context
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_tables(out_dir, stem: str, tables: list, metadata: dict, fmt_name: str = "csv") -> list:
    """Write tables as one CSV per table plus a sidecar, or one JSON document.

    The CSV sidecar ``<stem>.meta.json`` lists each file with its NaN count.
    Returns the written paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt_name == "json":
        path = out / f"{stem}.json"
        _write(path, json_document(tables, metadata))
        return [path]
    files = {}
    for t in tables:
        path = out / f"{t.name}.csv"
        _write(path, csv_text(t))
        files[path.name] = {"rows": t.n_rows, "nan_count": t.nan_count()}
        written.append(path)
    side = out / f"{stem}.meta.json"
    _write(side, json.dumps(_jsonable({"tool": "atomloc", "version": __version__,
                                        **metadata, "files": files}),
                            sort_keys=True, indent=1) + "\n")
    written.append(side)
    return written


def read_csv(path) -> tuple[list, np.ndarray, dict]:
    """Columns, data (rows x cols, NaN kept) and the comment metadata of a CSV table."""
    meta = {}
    rows = []
    header = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, _, val = line[2:].partition(": ")
                meta[key] = val
            elif header is None:
                header = line.split(",")
            elif line:
                rows.append([float(v) for v in line.split(",")])
    return header, np.array(rows, dtype=float).reshape(-1, len(header)), meta
