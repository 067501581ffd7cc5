"""CSV/JSON emitters for traces, tables and metrics records."""
import csv
import io
import json

import numpy as np

SCHEMA_VERSION = 1

TRACE_COLUMNS = ("t_us", "re", "im", "intensity")


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex numbers for json."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def dumps(record):
    return json.dumps(jsonable(record), indent=2, sort_keys=True) + "\n"


def trace_rows(times, trace):
    trace = np.asarray(trace, complex)
    return np.column_stack([times, trace.real, trace.imag, np.abs(trace) ** 2])


def table_text(columns, rows, fmt="csv"):
    """Serialise a table as CSV text (``%.10g``) or as a JSON object of columns."""
    rows = np.asarray(rows, dtype=float)
    if fmt == "json":
        return dumps({c: rows[:, i] for i, c in enumerate(columns)})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([f"{v:.10g}" for v in row])
    return buf.getvalue()


def trace_text(times, trace, fmt="csv"):
    return table_text(TRACE_COLUMNS, trace_rows(times, trace), fmt)


def read_trace_csv(path):
    """Read a trace CSV back into ``(t, complex trace)``."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1] + 1j * data[:, 2]
