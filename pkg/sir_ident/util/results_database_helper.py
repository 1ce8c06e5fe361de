import json
import logging
import os

import pandas as pd
from sqlalchemy import create_engine, event
from sqlalchemy.orm import sessionmaker

from sir_ident.databases.model import Base, ExperimentRun, ReplicateRecord
from sir_ident.experiments.report import REPLICATE_COLUMNS

logger = logging.getLogger(__name__)


def _enable_foreign_keys(dbapi_connection, connection_record):
    cursor = dbapi_connection.cursor()
    cursor.execute("PRAGMA foreign_keys = ON")
    cursor.close()


class ResultsDatabaseHelper:
    def __init__(self, db_path):
        """Opens (and creates if needed) the SQLite file holding experiment runs.

        Args:
            db_path (str): Path to the database file.
        """
        self.db_path = os.path.abspath(db_path)
        os.makedirs(os.path.dirname(self.db_path), exist_ok=True)
        self.engine = create_engine(f"sqlite:///{self.db_path}")
        event.listen(self.engine, "connect", _enable_foreign_keys)
        Base.metadata.create_all(self.engine)
        self.Session = sessionmaker(bind=self.engine)

    def save_report(self, report):
        """Stores a report and all of its replicate rows.

        Args:
            report (ExperimentReport): The report to store.

        Returns:
            int: The id of the new run.
        """
        run = ExperimentRun(
            master_seed=str(report.config.master_seed),
            branch=report.config.branch.value,
            config_json=json.dumps(report.config.to_dict()),
            rng_identifier=report.rng_identifier,
            attempts=report.attempts,
            ok_count=report.ok_count,
            minor_outbreaks=report.minor_outbreaks,
            failures=report.failures,
        )
        for row in report.rows:
            run.replicates.append(ReplicateRecord(replicate_index=row.index, seed=str(row.seed),
                                                  status=row.status_label, **row.estimate_columns()))
        with self.Session() as session:
            session.add(run)
            session.commit()
            run_id = run.id
        logger.info("saved run %d (%d replicates) to %s", run_id, report.attempts, self.db_path)
        return run_id

    def get_runs(self):
        """Returns every stored run, newest first, as a DataFrame."""
        with self.Session() as session:
            runs = session.query(ExperimentRun).order_by(ExperimentRun.id.desc()).all()
            records = [{
                "id": run.id,
                "created_at": run.created_at,
                "master_seed": run.master_seed,
                "branch": run.branch,
                "attempts": run.attempts,
                "ok": run.ok_count,
                "minor_outbreaks": run.minor_outbreaks,
                "failures": run.failures,
            } for run in runs]
        return pd.DataFrame.from_records(records, columns=["id", "created_at", "master_seed", "branch", "attempts",
                                                           "ok", "minor_outbreaks", "failures"])

    def load_replicates(self, run_id):
        """Replicate rows of one run in index order, with the CSV column names.

        Raises:
            KeyError: If no run has this id.
        """
        with self.Session() as session:
            run = session.get(ExperimentRun, run_id)
            if run is None:
                raise KeyError(f"no stored run with id {run_id}")
            records = [{
                "index": record.replicate_index,
                "seed": record.seed,
                "status": record.status,
                **{name: getattr(record, name) for name in REPLICATE_COLUMNS[3:]},
            } for record in run.replicates]
        return pd.DataFrame.from_records(records, columns=REPLICATE_COLUMNS)

    def delete_run(self, run_id):
        """Deletes a run and its replicates. Returns True if the run existed."""
        with self.Session() as session:
            run = session.get(ExperimentRun, run_id)
            if run is None:
                return False
            session.delete(run)
            session.commit()
        logger.info("deleted run %d", run_id)
        return True
