"""Serological-style surveys: sample m individuals without replacement.

Two surveys supply the third piece of information the estimation needs:
the immune fraction at t = 0, and the reported fraction among the
infectious at the peak of the epidemic.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from sir_ident.errors import EmptyDenominator
from sir_ident.inference.estimation import SurveyKind
from sir_ident.model.gillespie import EventLog
from sir_ident.model.parameters import CompartmentState
from sir_ident.util.seeding import SeededRng

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class SurveyEstimate:
    """Outcome of one survey.

    Attributes:
        kind (SurveyKind): Which parameter the survey estimates.
        m (int): Sample size.
        positives (int): Immune (or reported-infectious) individuals in the sample.
        denominator (int): m for the immunity survey, the infectious in the
            sample for the reporting survey.
        estimate (float): positives / denominator.
        time (float): When the sample was taken.
    """
    kind: SurveyKind
    m: int
    positives: int
    denominator: int
    estimate: float
    time: float = 0.0

    def __post_init__(self):
        if not 0 <= self.positives <= self.denominator <= self.m:
            raise ValueError(f"survey counts out of order: positives={self.positives}, "
                             f"denominator={self.denominator}, m={self.m}")

    @property
    def value(self) -> float:
        return self.estimate


def _check_sample_size(m: int, n: int):
    if not 1 <= m <= n:
        raise ValueError(f"sample size must lie in [1, {n}], got {m}")


def survey_immunity(initial_state: CompartmentState, m: int, rng: SeededRng) -> SurveyEstimate:
    """Estimate pi from a sample of ``m`` individuals taken at t = 0.

    The immune count in the sample is hypergeometric with R_r(0) + R_u(0)
    immune out of n.
    """
    n = int(initial_state.total)
    _check_sample_size(m, n)
    immune = int(initial_state.r_r + initial_state.r_u)
    positives = int(rng.generator().hypergeometric(immune, n - immune, m))
    return SurveyEstimate(SurveyKind.IMMUNITY_AT_T0, m=m, positives=positives, denominator=m,
                          estimate=positives / m)


def peak_index(log: EventLog) -> int:
    """Row of ``log.all_states`` where I_r + I_u first attains its maximum."""
    states = log.all_states
    return int(np.argmax(states[:, 1] + states[:, 2]))


def survey_reporting_at_peak(log: EventLog, m: int, rng: SeededRng) -> SurveyEstimate:
    """Estimate p from a sample of ``m`` individuals taken at the epidemic peak.

    The sample is a joint hypergeometric draw over reported infectious,
    unreported infectious and everyone else; the estimate is the reported
    share among the infectious in the sample.

    Raises:
        EmptyDenominator: If the sample contains no infectious individuals.
    """
    _check_sample_size(m, log.n)
    index = peak_index(log)
    state = log.all_states[index]
    i_r, i_u = int(state[1]), int(state[2])
    colors = np.array([i_r, i_u, log.n - i_r - i_u], dtype=np.int64)
    sample = rng.generator().multivariate_hypergeometric(colors, m)
    positives = int(sample[0])
    denominator = int(sample[0] + sample[1])
    if denominator == 0:
        raise EmptyDenominator(f"no infectious individuals among {m} sampled at the peak "
                               f"(I_r={i_r}, I_u={i_u})")
    peak_time = float(log.all_times[index])
    logger.debug("peak survey at t=%.4g: %d/%d reported", peak_time, positives, denominator)
    return SurveyEstimate(SurveyKind.REPORTING_AT_PEAK, m=m, positives=positives, denominator=denominator,
                          estimate=positives / denominator, time=peak_time)
