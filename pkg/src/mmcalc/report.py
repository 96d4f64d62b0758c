"""Report rows and their deterministic CSV / JSON serialisation."""

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, fields
from typing import Optional

COLUMNS = ("suite", "case", "resolution", "measured", "reference", "error", "order",
           "tolerance", "passed")


@dataclass(frozen=True)
class ReportRow:
    suite: str
    case: str
    resolution: str
    measured: float
    reference: float
    error: float
    order: Optional[float]
    tolerance: float
    passed: bool = None

    def __post_init__(self):
        ok = bool(self.error <= self.tolerance) if math.isfinite(self.error) else False
        if self.passed is not None and self.passed != ok:
            raise ValueError("passed flag must equal error <= tolerance")
        object.__setattr__(self, "passed", ok)


def make_row(suite, case, resolution, measured, reference, error, tolerance, order=None):
    return ReportRow(suite, case, str(resolution), float(measured), float(reference), float(error),
                     None if order is None else float(order), float(tolerance))


def fmt(x):
    """17 significant digits, enough to round-trip a double exactly."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([fmt(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def _parse_float(s):
    return None if s == "" else float(s)


def from_csv(text):
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(ReportRow(rec["suite"], rec["case"], rec["resolution"],
                              float(rec["measured"]), float(rec["reference"]), float(rec["error"]),
                              _parse_float(rec["order"]), float(rec["tolerance"]),
                              rec["passed"] == "true"))
    return rows


def to_json(rows):
    # floats are written by repr, which round-trips exactly
    return json.dumps([{c: getattr(r, c) for c in COLUMNS} for r in rows], indent=1) + "\n"


def from_json(text):
    return [ReportRow(**{f.name: rec[f.name] for f in fields(ReportRow)}) for rec in json.loads(text)]


def render(rows, fmt_name="csv"):
    if not rows:
        raise ValueError("no rows to report")
    if fmt_name == "csv":
        return to_csv(rows)
    if fmt_name == "json":
        return to_json(rows)
    raise ValueError(f"unknown format {fmt_name!r}")


def write_text(path, text):
    """Write atomically so that a failure never leaves partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".mm-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_report(rows, path, fmt_name="csv"):
    write_text(path, render(rows, fmt_name))


def table_csv(columns, records):
    """Generic CSV table (geometry dumps, trajectories) with 17-digit floats."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([fmt(x) if x is None or isinstance(x, (int, str)) else fmt(float(x)) for x in rec])
    return buf.getvalue()


def observed_order(e_coarse, e_fine, n_coarse, n_fine):
    """``log(e_h / e_{h'}) / log(h / h')``; None if either error is zero."""
    if e_coarse <= 0 or e_fine <= 0:
        return None
    return math.log(e_coarse / e_fine) / math.log(n_fine / n_coarse)


__all__ = ["COLUMNS", "ReportRow", "make_row", "to_csv", "from_csv", "to_json", "from_json",
           "render", "emit_report", "write_text", "table_csv", "observed_order"]
