"""Monte Carlo experiment: simulate, survey, estimate, aggregate.

Replicate ``k`` always uses the seed ``mix(master_seed, k)``, and rows are
reduced in index order, so a report depends on the master seed only and
not on how many worker processes produced it.
"""
from __future__ import annotations

import logging
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from tqdm import tqdm
from yacs.config import CfgNode

from sir_ident.config.loader import initial_conditions_from_cfg, params_from_cfg
from sir_ident.errors import InvalidParameters, SirIdentError
from sir_ident.experiments.replicates import (
    Aggregate,
    Branch,
    ReplicateRow,
    ReplicateStatus,
    aggregate_rows,
    aggregate_summaries,
)
from sir_ident.inference.estimation import SummaryStats, estimate_remaining, fit_growth_rate
from sir_ident.inference.surveys import survey_immunity, survey_reporting_at_peak
from sir_ident.model.gillespie import final_reported_fraction, simulate
from sir_ident.model.parameters import InitialConditions, ModelParams
from sir_ident.util.seeding import RNG_IDENTIFIER, SeededRng

logger = logging.getLogger(__name__)

# child streams of a replicate seed
IMMUNITY_SURVEY_STREAM = 1
REPORTING_SURVEY_STREAM = 2


def default_workers() -> int:
    """Half the cpu cores, at least one."""
    num_cores = multiprocessing.cpu_count()
    if num_cores > 1:
        return num_cores // 2
    return 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings of one experiment.

    Attributes:
        params (ModelParams): True parameters of every replicate.
        init (InitialConditions): Population size and initial reported fraction.
        survey_size (int): Sample size m of each survey.
        target_outbreaks (int): Number of Ok replicates to collect.
        outbreak_threshold (float): Final reported fraction separating major from minor outbreaks.
        growth_threshold (float): Fraction of n reported that closes the growth-fit window.
        master_seed (int): Seed every replicate seed is derived from.
        branch (Branch): GivenPi, GivenP or Both.
        max_replicates (int): Replicates tried before giving up; None means 50 * target_outbreaks.
        num_workers (int): Worker processes; None means half the cores, 0 or 1 runs in-process.
        include_initial (bool): Count the initially reported infectious in the growth fit.
    """
    params: ModelParams
    init: InitialConditions
    survey_size: int = 1000
    target_outbreaks: int = 100
    outbreak_threshold: float = 0.05
    growth_threshold: float = 0.075
    master_seed: int = 8402
    branch: Branch = Branch.BOTH
    max_replicates: int | None = None
    num_workers: int | None = field(default=None, compare=False)
    include_initial: bool = False

    def __post_init__(self):
        if not 1 <= self.survey_size <= self.init.n:
            raise InvalidParameters(f"survey size must lie in [1, n={self.init.n}], got {self.survey_size}")
        if self.target_outbreaks < 1:
            raise InvalidParameters(f"target_outbreaks must be at least 1, got {self.target_outbreaks}")
        if self.max_replicates is not None and self.max_replicates < self.target_outbreaks:
            raise InvalidParameters("max_replicates cannot be smaller than target_outbreaks")
        object.__setattr__(self, "branch", Branch(self.branch))

    @property
    def replicate_limit(self) -> int:
        return self.max_replicates if self.max_replicates is not None else 50 * self.target_outbreaks

    @property
    def workers(self) -> int:
        return default_workers() if self.num_workers is None or self.num_workers < 0 else self.num_workers

    @classmethod
    def from_cfg(cls, cfg: CfgNode) -> ExperimentConfig:
        return cls(
            params=params_from_cfg(cfg),
            init=initial_conditions_from_cfg(cfg),
            survey_size=int(cfg.ESTIMATION.SURVEY_SIZE),
            target_outbreaks=int(cfg.EXPERIMENT.TARGET_OUTBREAKS),
            outbreak_threshold=float(cfg.EXPERIMENT.OUTBREAK_THRESHOLD),
            growth_threshold=float(cfg.ESTIMATION.GROWTH_THRESHOLD),
            master_seed=int(cfg.EXPERIMENT.MASTER_SEED),
            branch=Branch(cfg.EXPERIMENT.BRANCH),
            max_replicates=int(cfg.EXPERIMENT.MAX_REPLICATES) or None,
            num_workers=int(cfg.EXPERIMENT.NUM_WORKERS),
            include_initial=bool(cfg.ESTIMATION.INCLUDE_INITIAL),
        )

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "n": self.init.n,
            "i0": self.init.i0,
            "survey_size": self.survey_size,
            "target_outbreaks": self.target_outbreaks,
            "outbreak_threshold": self.outbreak_threshold,
            "growth_threshold": self.growth_threshold,
            "master_seed": self.master_seed,
            "branch": self.branch.value,
            "max_replicates": self.replicate_limit,
            "include_initial": self.include_initial,
        }


@dataclass(frozen=True)
class ExperimentReport:
    """Aggregates over the Ok rows, per branch, plus the rows themselves."""
    config: ExperimentConfig
    rows: list[ReplicateRow]
    aggregates: dict[Branch, dict[str, Aggregate]]
    summaries: dict[str, Aggregate]
    rng_identifier: str = RNG_IDENTIFIER

    @property
    def attempts(self) -> int:
        return len(self.rows)

    @property
    def ok_count(self) -> int:
        return sum(row.is_ok for row in self.rows)

    @property
    def minor_outbreaks(self) -> int:
        return sum(row.status is ReplicateStatus.MINOR_OUTBREAK for row in self.rows)

    @property
    def failures(self) -> int:
        return sum(row.status is ReplicateStatus.ESTIMATION_FAILED for row in self.rows)

    @classmethod
    def from_rows(cls, config: ExperimentConfig, rows: list[ReplicateRow]) -> ExperimentReport:
        aggregates = {branch: aggregate_rows(rows, branch) for branch in config.branch.members()}
        return cls(config=config, rows=list(rows), aggregates=aggregates, summaries=aggregate_summaries(rows))

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "rng": self.rng_identifier,
            "attempts": self.attempts,
            "ok": self.ok_count,
            "minor_outbreaks": self.minor_outbreaks,
            "failures": self.failures,
            "summaries": {name: agg.to_dict() for name, agg in self.summaries.items()},
            "aggregates": {branch.value: {name: agg.to_dict() for name, agg in aggs.items()}
                           for branch, aggs in self.aggregates.items()},
        }


def run_replicate(config: ExperimentConfig, index: int) -> ReplicateRow:
    """Simulate replicate ``index`` to extinction and estimate from it.

    Errors from the growth fit, the surveys or the inversion become an
    EstimationFailed row named after the exception.
    """
    rng = SeededRng.for_replicate(config.master_seed, index)
    log = simulate(config.params, config.init, rng=rng)
    z_r_hat = final_reported_fraction(log)
    if z_r_hat < config.outbreak_threshold:
        return ReplicateRow(index=index, seed=rng.seed, status=ReplicateStatus.MINOR_OUTBREAK)

    branches = config.branch.members()
    estimates = {}
    try:
        fit = fit_growth_rate(log, config.growth_threshold, include_initial=config.include_initial)
        stats = SummaryStats(rho_hat=fit.rho_hat, z_r_hat=z_r_hat, gamma=config.params.gamma)
        if Branch.GIVEN_PI in branches:
            survey = survey_immunity(log.initial_state, config.survey_size, rng.spawn(IMMUNITY_SURVEY_STREAM))
            result = estimate_remaining(stats, survey)
            estimates.update(pi_survey=survey.estimate, p_hat_givenpi=result.p_hat,
                             beta_hat_givenpi=result.beta_star_hat)
        if Branch.GIVEN_P in branches:
            survey = survey_reporting_at_peak(log, config.survey_size, rng.spawn(REPORTING_SURVEY_STREAM))
            result = estimate_remaining(stats, survey)
            estimates.update(p_survey=survey.estimate, pi_hat_givenp=result.pi_hat,
                             beta_hat_givenp=result.beta_star_hat)
    except SirIdentError as e:
        logger.debug("replicate %d failed: %s", index, e)
        return ReplicateRow(index=index, seed=rng.seed, status=ReplicateStatus.ESTIMATION_FAILED,
                            reason=type(e).__name__)

    return ReplicateRow(index=index, seed=rng.seed, status=ReplicateStatus.OK, rho_hat=fit.rho_hat,
                        z_r_hat=z_r_hat, **estimates)


def _collect(rows: list[ReplicateRow], batch: list[ReplicateRow], target: int, bar, progress_callback) -> bool:
    """Append ``batch`` in index order until ``target`` Ok rows are held; True once reached."""
    ok = sum(row.is_ok for row in rows)
    for row in batch:
        rows.append(row)
        if row.is_ok:
            ok += 1
            bar.update(1)
            if progress_callback:
                progress_callback(int(ok / target * 100))
            if ok == target:
                return True
    return False


def run_experiment(config: ExperimentConfig, progress_callback=None, progress: bool = True) -> ExperimentReport:
    """Run replicates 0, 1, 2, ... until ``target_outbreaks`` of them are Ok.

    Args:
        config (ExperimentConfig): Experiment settings.
        progress_callback (callable, optional): Called with the percentage of
            the target reached after every Ok replicate.
        progress (bool): Show a tqdm progress bar.

    Returns:
        ExperimentReport: All rows up to the one completing the target, and their aggregates.
    """
    workers = config.workers
    limit = config.replicate_limit
    target = config.target_outbreaks
    logger.info("experiment: target %d outbreaks, master seed %d, %d workers", target, config.master_seed, workers)

    rows: list[ReplicateRow] = []
    done = False
    next_index = 0
    with tqdm(total=target, desc="outbreaks", disable=not progress) as bar:
        if workers <= 1:
            while not done and next_index < limit:
                done = _collect(rows, [run_replicate(config, next_index)], target, bar, progress_callback)
                next_index += 1
        else:
            batch_size = 4 * workers
            with ProcessPoolExecutor(max_workers=workers) as executor:
                while not done and next_index < limit:
                    indices = range(next_index, min(next_index + batch_size, limit))
                    futures = [executor.submit(run_replicate, config, index) for index in indices]
                    done = _collect(rows, [future.result() for future in futures], target, bar, progress_callback)
                    next_index = indices.stop

    report = ExperimentReport.from_rows(config, rows)
    if not done:
        logger.warning("stopped after %d replicates with %d of %d outbreaks", report.attempts, report.ok_count, target)
    logger.info("experiment finished: %d attempts, %d ok, %d minor, %d failed",
                report.attempts, report.ok_count, report.minor_outbreaks, report.failures)
    return report
