"""Serialization of estimator outputs: JSON documents and flat CSV tables.

All emitters are deterministic: fixed key order, repr-formatted floats,
no timestamps. Identical inputs produce identical bytes.
"""

from __future__ import annotations

import csv
import io
import json

from .estimator import QuantileVector, ReportRow, SubgroupReports, UniquenessReport

REPORT_CSV_COLUMNS = (
    "label", "strategy", "p", "q", "decay", "intercept", "r_squared",
    "cutpoint", "interest_count", "actionable", "n_points_used",
    "ci_low", "ci_high", "n_resamples", "n_failed",
)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def row_to_dict(row: ReportRow) -> dict:
    return {
        "strategy": row.strategy,
        "p": row.p,
        "q": row.q,
        "decay": row.decay,
        "intercept": row.intercept,
        "r_squared": row.r_squared,
        "cutpoint": row.cutpoint,
        "interest_count": row.interest_count,
        "actionable": row.actionable,
        "n_points_used": row.n_points_used,
        "ci_low": row.ci_low,
        "ci_high": row.ci_high,
        "n_resamples": row.n_resamples,
        "n_failed": row.n_failed,
        "ci_brackets_point": row.ci_brackets_point,
    }


def report_to_dict(report: UniquenessReport) -> dict:
    return {
        "label": report.label,
        "n_users": report.n_users,
        "floor": report.floor,
        "monotonic_in_p": report.monotonic_in_p,
        "rows": [row_to_dict(r) for r in report.rows],
    }


def report_to_json(report: UniquenessReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"


def report_rows_csv(reports) -> str:
    """Flat CSV over one or many reports (one line per strategy/P pair)."""
    if isinstance(reports, UniquenessReport):
        reports = [reports]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_CSV_COLUMNS)
    for report in reports:
        for row in report.rows:
            d = row_to_dict(row)
            d["label"] = report.label
            writer.writerow([_cell(d[c]) for c in REPORT_CSV_COLUMNS])
    return buf.getvalue()


def vector_csv(vector: QuantileVector) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n_interests", "audience_size"])
    for n, value in vector.points():
        writer.writerow([n, value])
    return buf.getvalue()


def subgroups_to_dict(sub: SubgroupReports) -> dict:
    return {
        "grouping": sub.grouping,
        "min_users": sub.min_users,
        "reports": [report_to_dict(r) for r in sub.reports],
        "skipped": [
            {"label": s.label, "n_users": s.n_users, "reason": s.reason}
            for s in sub.skipped
        ],
    }


def subgroups_to_json(sub: SubgroupReports) -> str:
    return json.dumps(subgroups_to_dict(sub), indent=2, sort_keys=True) + "\n"
