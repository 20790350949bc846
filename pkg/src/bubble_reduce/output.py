"""CSV and JSON serialisation of reports.

CSV layout: ``# key: value`` summary lines, then each table as a header row
and data rows.  When a report has several tables each one is introduced by a
``# table: <name>`` line and separated by a blank line, so
``pandas.read_csv(path, comment="#")`` reads a single-table report directly.
Floats are written with 17 significant digits, which round-trips binary64.
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .jsonable import plain
from .reports import Report

__all__ = ["format_value", "to_csv", "to_json", "plain"]


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(format_value(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}: {format_value(v)}" for k, v in value.items()) + "}"
    return str(value)


def to_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for key, value in report.summary.items():
        if key == "results":
            continue
        buf.write(f"# {key}: {format_value(value)}\n")
    buf.write(f"# passed: {format_value(report.passed)}\n")
    several = len(report.tables) > 1
    for i, (name, table) in enumerate(report.tables.items()):
        if several:
            if i:
                buf.write("\n")
            buf.write(f"# table: {name}\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def to_json(report: Report, meta: dict) -> str:
    document = {
        "meta": meta,
        "command": report.command,
        "passed": report.passed,
        "summary": report.summary,
        "tables": {name: {"columns": list(t.columns), "rows": t.rows} for name, t in report.tables.items()},
    }
    return json.dumps(plain(document), indent=2) + "\n"
