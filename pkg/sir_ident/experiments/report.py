"""Writing experiment reports and reading their replicate tables back."""
from __future__ import annotations

import json
import logging
import math
from pathlib import Path

import pandas as pd

from sir_ident.experiments.harness import ExperimentReport
from sir_ident.experiments.replicates import Branch, ReplicateRow, ReplicateStatus, aggregate_rows
from sir_ident.util.csv_io import write_frame

logger = logging.getLogger(__name__)

REPLICATE_COLUMNS = ["index", "seed", "status", "rho_hat", "z_r_hat", "pi_survey", "p_survey",
                     "p_hat_givenpi", "beta_hat_givenpi", "pi_hat_givenp", "beta_hat_givenp"]


def replicate_frame(rows) -> pd.DataFrame:
    records = []
    for row in rows:
        record = {"index": row.index, "seed": str(row.seed), "status": row.status_label}
        record.update(row.estimate_columns())
        records.append(record)
    return pd.DataFrame.from_records(records, columns=REPLICATE_COLUMNS)


def summary_frame(report: ExperimentReport) -> pd.DataFrame:
    """One row per (branch, parameter): mean, sd, count."""
    records = [
        {"branch": branch.value, "parameter": name, **agg.to_dict()}
        for branch, aggs in report.aggregates.items()
        for name, agg in aggs.items()
    ]
    records += [{"branch": "", "parameter": name, **agg.to_dict()} for name, agg in report.summaries.items()]
    return pd.DataFrame.from_records(records, columns=["branch", "parameter", "mean", "sd", "count"])


def write_report(report: ExperimentReport, out: str | Path, fmt: str = "json") -> list[Path]:
    """Write the replicate CSV next to a JSON report (``json``) or a summary CSV (``csv``).

    Args:
        report (ExperimentReport): Report to write.
        out (str | Path): Output path; its suffix is replaced.
        fmt (str): ``json`` or ``csv``.

    Returns:
        list[Path]: The files written, the replicate CSV last.
    """
    out = Path(out)
    replicates_path = out.with_name(out.stem + "_replicates.csv")
    if fmt == "json":
        summary_path = out.with_suffix(".json")
        summary_path.parent.mkdir(parents=True, exist_ok=True)
        with open(summary_path, "w") as f:
            json.dump(report.to_dict(), f, indent=2)
        logger.info("wrote report to %s", summary_path)
    elif fmt == "csv":
        summary_path = write_frame(summary_frame(report), out.with_suffix(".csv"))
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    write_frame(replicate_frame(report.rows), replicates_path)
    return [summary_path, replicates_path]


def _optional(value) -> float | None:
    return None if value is None or (isinstance(value, float) and math.isnan(value)) else float(value)


def read_replicates(path: str | Path) -> list[ReplicateRow]:
    """Replicate rows from a CSV written by :func:`write_report`."""
    frame = pd.read_csv(path, dtype={"seed": str, "status": str}, float_precision="round_trip")
    rows = []
    for record in frame.to_dict(orient="records"):
        status, reason = ReplicateRow.parse_status(record["status"])
        estimates = {name: _optional(record[name]) for name in REPLICATE_COLUMNS[3:]}
        rows.append(ReplicateRow(index=int(record["index"]), seed=int(record["seed"]), status=ReplicateStatus(status),
                                 reason=reason, **estimates))
    return rows


def recompute_aggregates(path: str | Path, branch: Branch = Branch.BOTH) -> dict[Branch, dict]:
    """Aggregates recomputed from a replicate CSV alone."""
    rows = read_replicates(path)
    return {member: aggregate_rows(rows, member) for member in Branch(branch).members()}
