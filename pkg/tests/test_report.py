import json

import pandas as pd
import pytest

from sir_ident.experiments.harness import ExperimentConfig, ExperimentReport
from sir_ident.experiments.replicates import Branch
from sir_ident.experiments.report import (
    REPLICATE_COLUMNS,
    read_replicates,
    recompute_aggregates,
    replicate_frame,
    summary_frame,
    write_report,
)
from sir_ident.model.parameters import InitialConditions, ModelParams


def test_json_report(tmp_path, small_report):
    summary, replicates = write_report(small_report, tmp_path / "run", "json")
    assert summary == tmp_path / "run.json"
    assert replicates == tmp_path / "run_replicates.csv"

    data = json.loads(summary.read_text())
    assert data["ok"] == 3
    assert data["attempts"] == small_report.attempts
    assert data["config"]["master_seed"] == 77
    assert set(data["aggregates"]) == {"GivenPi", "GivenP"}
    assert data["aggregates"]["GivenPi"]["p"]["count"] == 3
    assert data["rng"] == small_report.rng_identifier


def test_replicate_csv_header(tmp_path, small_report):
    _, replicates = write_report(small_report, tmp_path / "run.json", "json")
    header = replicates.read_text().splitlines()[0]
    assert header == ",".join(REPLICATE_COLUMNS)


def test_replicate_rows_read_back_exactly(tmp_path, small_report):
    _, replicates = write_report(small_report, tmp_path / "run", "json")
    assert read_replicates(replicates) == small_report.rows


def test_aggregates_recomputed_from_csv(tmp_path, small_report):
    _, replicates = write_report(small_report, tmp_path / "run", "csv")
    assert recompute_aggregates(replicates, Branch.BOTH) == small_report.aggregates


def test_csv_summary(tmp_path, small_report):
    summary, _ = write_report(small_report, tmp_path / "run", "csv")
    frame = pd.read_csv(summary)
    assert list(frame.columns) == ["branch", "parameter", "mean", "sd", "count"]
    assert len(frame) == len(summary_frame(small_report))
    assert set(frame["parameter"]) == {"p", "pi", "beta_star", "rho_hat", "z_r_hat"}


def test_seeds_written_as_text(small_report):
    frame = replicate_frame(small_report.rows)
    assert frame["seed"].tolist() == [str(row.seed) for row in small_report.rows]


def test_unknown_format(tmp_path, small_report):
    with pytest.raises(ValueError):
        write_report(small_report, tmp_path / "run", "xml")


def test_empty_report_has_null_statistics(tmp_path):
    config = ExperimentConfig(params=ModelParams(0.5, 0.5, 0.4, 0.3, 1.0), init=InitialConditions(100, 0.05),
                              survey_size=10, target_outbreaks=1, num_workers=0)
    report = ExperimentReport.from_rows(config, [])
    summary, replicates = write_report(report, tmp_path / "empty", "json")
    data = json.loads(summary.read_text())
    assert data["attempts"] == 0
    assert data["aggregates"]["GivenPi"]["p"] == {"mean": None, "sd": None, "count": 0}
    assert read_replicates(replicates) == []
