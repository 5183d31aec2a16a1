"""Deterministic JSON and CSV emission for reports."""

from __future__ import annotations

import csv
import io
import json
import platform
import sys
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

REPORT_SCHEMA = "toric_ccc.report/1"
CSV_SCHEMA = "toric_ccc.table/1"
CONVENTION = "N_R and M_R identified through the standard basis of R^n"


def jsonable(obj):
    """Recursively convert Fractions, numpy scalars/arrays, cones and tuples."""
    from .fan import Cone

    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, Cone) else ",".join(map(str, k.rays)): jsonable(v)
                for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, Cone):
        return list(obj.rays)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def versions() -> dict:
    import scipy

    from . import __version__
    return {"toric_ccc": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


def wrap(report: dict, config: dict) -> dict:
    """Attach schema, resolved config and conventions. Output is deterministic."""
    body = dict(jsonable(report))
    body["schema"] = REPORT_SCHEMA
    body["config"] = jsonable(config)
    body["convention"] = CONVENTION
    body["versions"] = versions()
    return body


def dumps(report: dict) -> str:
    return json.dumps(jsonable(report), indent=2, sort_keys=True)


def envelope(report: dict) -> dict:
    """Report plus a timestamp kept outside the comparable body."""
    return {"report": report,
            "envelope": {"timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
                         "argv": sys.argv[1:]}}


def csv_table(rows, columns=("eps", "quantity", "bound", "pass")) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_SCHEMA}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if r.get(c) is None else jsonable(r.get(c)) for c in columns])
    return buf.getvalue()
