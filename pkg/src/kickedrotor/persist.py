"""CSV/JSON persistence for entropy series and run reports.

Floats are written with 17 significant digits so that values round-trip
exactly.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .entropy import EntropySeries, Functional


def fmt(x) -> str:
    return format(float(x), ".17g")


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n")


def _default(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def write_series_csv(path, series: EntropySeries, stderr=None, extra: dict | None = None) -> None:
    """``kick,value`` rows (plus ``stderr`` when given) and a JSON sidecar."""
    path = Path(path)
    cols = ["kick", "value"] + (["stderr"] if stderr is not None else [])
    lines = [",".join(cols)]
    for i, (t, v) in enumerate(zip(series.kicks, series.values)):
        row = [str(int(t)), fmt(v)]
        if stderr is not None:
            row.append(fmt(stderr[i]))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    meta = {"functional": series.functional.kind, "index": series.functional.index}
    meta.update(series.source)
    if extra:
        meta.update(extra)
    write_json(path.with_suffix(".json"), meta)


def read_series_csv(path) -> EntropySeries:
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    meta = json.loads(path.with_suffix(".json").read_text())
    f = Functional(meta.pop("functional"), meta.pop("index"))
    return EntropySeries(f, data[:, 0].astype(int), data[:, 1], meta)


def write_table_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return fmt(x)
    return str(x)
