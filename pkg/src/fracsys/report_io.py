"""Serialization of solver reports and sweep tables.

A run directory holds

* ``report.json``: scalar results plus the names of the field and trace files,
* ``trace.csv``: one row per iteration (iteration, energy, grad_norm, step, clamp),
* ``u.csv`` / ``v.csv``: spectral coefficients in the field-file format of
  :mod:`fracsys.spectral`.

Every file is written to a temporary name in the target directory and then
renamed into place, so a failure never leaves a half-written artifact behind.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .solvers import SolverReport
from .spectral import write_field

TRACE_COLUMNS = ("iteration", "energy", "grad_norm", "step", "clamp")


def atomic_write(path, writer) -> Path:
    """Call ``writer(tmp_path)`` and move the result to ``path`` in one rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    os.close(fd)
    try:
        writer(Path(tmp))
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def atomic_write_text(path, text: str) -> Path:
    return atomic_write(path, lambda p: p.write_text(text))


def _num(x: float):
    # JSON has no inf/nan; keep them as strings rather than emitting invalid JSON
    x = float(x)
    return x if x == x and abs(x) != float("inf") else str(x)


def report_to_dict(rep: SolverReport, fields: dict[str, str] | None = None, extra: dict | None = None) -> dict:
    d = {
        "solver": rep.solver,
        "converged": bool(rep.converged),
        "degenerate": bool(rep.degenerate),
        "iterations": int(rep.iterations),
        "energy": _num(rep.energy),
        "residual_u": _num(rep.residual_u),
        "residual_v": _num(rep.residual_v),
        "message": rep.message,
    }
    if rep.classification is not None:
        c = rep.classification
        d["classification"] = {
            "regime": c.tag.value,
            "pq": str(c.pq),
            "hyperbola_value": str(c.hyperbola_value),
            "threshold": str(c.threshold),
        }
    if fields:
        d["fields"] = dict(fields)
    d["trace"] = "trace.csv"
    if extra:
        d.update(extra)
    return d


def trace_csv(rep: SolverReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for i, row in enumerate(rep.trace, start=1):
        w.writerow([i, repr(float(row.energy)), repr(float(row.grad_norm)),
                    repr(float(row.step)), repr(float(row.clamp))])
    return buf.getvalue()


def write_run(outdir, rep: SolverReport, extra: dict | None = None) -> dict[str, Path]:
    """Write report.json, trace.csv, u.csv and v.csv into ``outdir``."""
    outdir = Path(outdir)
    paths = {
        "u": atomic_write(outdir / "u.csv", lambda p: write_field(p, rep.u)),
        "v": atomic_write(outdir / "v.csv", lambda p: write_field(p, rep.v)),
        "trace": atomic_write_text(outdir / "trace.csv", trace_csv(rep)),
    }
    doc = report_to_dict(rep, {"u": "u.csv", "v": "v.csv"}, extra)
    paths["report"] = atomic_write_text(outdir / "report.json", json.dumps(doc, indent=2) + "\n")
    return paths


def table_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()
