from datetime import datetime

import pytz
from sqlalchemy import Column, DateTime, Float, ForeignKey, Integer, String, Text
from sqlalchemy.orm import declarative_base, relationship

Base = declarative_base()


class ExperimentRun(Base):
    """One stored run of the Monte Carlo experiment.

    Attributes:
        id (int): Unique identifier of the run (primary key).
        created_at (datetime): When the run was stored, in UTC.
        master_seed (str): Master seed, stored as text since it may exceed a signed 64-bit integer.
        branch (str): GivenPi, GivenP or Both.
        config_json (str): The full experiment configuration.
        rng_identifier (str): Generator and seed-derivation scheme used.
        attempts (int): Replicates simulated.
        ok_count (int): Replicates used in the aggregates.
        minor_outbreaks (int): Replicates below the outbreak threshold.
        failures (int): Replicates whose estimation failed.
        replicates (list): The associated ReplicateRecord objects.
    """
    __tablename__ = 'experiment_runs'
    id = Column(Integer, primary_key=True)
    created_at = Column(DateTime(timezone=True), default=lambda: datetime.now(pytz.utc), nullable=False)
    master_seed = Column(String, nullable=False)
    branch = Column(String, nullable=False)
    config_json = Column(Text, nullable=False)
    rng_identifier = Column(String, nullable=False)
    attempts = Column(Integer, nullable=False, default=0)
    ok_count = Column(Integer, nullable=False, default=0)
    minor_outbreaks = Column(Integer, nullable=False, default=0)
    failures = Column(Integer, nullable=False, default=0)

    replicates = relationship('ReplicateRecord', back_populates='run', cascade='all, delete-orphan',
                              order_by='ReplicateRecord.replicate_index')

    def __repr__(self):
        return f"<ExperimentRun(id={self.id}, seed={self.master_seed}, ok={self.ok_count}/{self.attempts})>"


class ReplicateRecord(Base):
    """One replicate of a stored run; estimate columns are NULL unless status is Ok."""
    __tablename__ = 'replicates'
    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey('experiment_runs.id', ondelete='CASCADE'), nullable=False)
    replicate_index = Column(Integer, nullable=False)
    seed = Column(String, nullable=False)
    status = Column(String, nullable=False)
    rho_hat = Column(Float, nullable=True)
    z_r_hat = Column(Float, nullable=True)
    pi_survey = Column(Float, nullable=True)
    p_survey = Column(Float, nullable=True)
    p_hat_givenpi = Column(Float, nullable=True)
    beta_hat_givenpi = Column(Float, nullable=True)
    pi_hat_givenp = Column(Float, nullable=True)
    beta_hat_givenp = Column(Float, nullable=True)

    run = relationship("ExperimentRun", back_populates="replicates")

    def __repr__(self):
        return f"<ReplicateRecord(run={self.run_id}, index={self.replicate_index}, status='{self.status}')>"
