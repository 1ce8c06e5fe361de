import numpy as np
import pytest

from sir_ident.errors import EmptyDenominator
from sir_ident.inference.estimation import SurveyKind
from sir_ident.inference.surveys import SurveyEstimate, peak_index, survey_immunity, survey_reporting_at_peak
from sir_ident.model.gillespie import EventKind, replay_events
from sir_ident.model.parameters import CompartmentState
from sir_ident.util.seeding import SeededRng

REFERENCE_START = CompartmentState(6975, 10, 15, 1200, 1800)


def test_census_gives_exact_immune_fraction():
    survey = survey_immunity(REFERENCE_START, 10000, SeededRng(0))
    assert survey.kind is SurveyKind.IMMUNITY_AT_T0
    assert survey.estimate == 0.3
    assert survey.denominator == 10000


def test_no_immunity_gives_zero():
    survey = survey_immunity(CompartmentState(990, 10, 0, 0, 0), 100, SeededRng(1))
    assert survey.positives == 0
    assert survey.value == 0.0


def test_sample_size_checked():
    with pytest.raises(ValueError):
        survey_immunity(REFERENCE_START, 0, SeededRng(0))
    with pytest.raises(ValueError):
        survey_immunity(REFERENCE_START, 10001, SeededRng(0))


def test_immunity_survey_is_unbiased():
    estimates = np.array([survey_immunity(REFERENCE_START, 1000, SeededRng(seed)).estimate for seed in range(1000)])
    expected_sd = np.sqrt(0.3 * 0.7 / 1000 * (10000 - 1000) / (10000 - 1))
    assert abs(estimates.mean() - 0.3) <= 3 * expected_sd / np.sqrt(len(estimates))
    assert estimates.std(ddof=1) == pytest.approx(expected_sd, rel=0.2)


def test_same_seed_same_survey():
    a = survey_immunity(REFERENCE_START, 1000, SeededRng(5))
    b = survey_immunity(REFERENCE_START, 1000, SeededRng(5))
    assert a == b


def test_peak_index_takes_first_maximum():
    start = CompartmentState(97, 3, 0, 0, 0)
    kinds = [EventKind.REPORTED_RECOVERY, EventKind.REPORTED_INFECTION, EventKind.REPORTED_RECOVERY]
    log = replay_events(start, 100, [1.0, 2.0, 3.0], kinds)
    assert peak_index(log) == 0

    kinds = [EventKind.UNREPORTED_INFECTION, EventKind.REPORTED_RECOVERY, EventKind.REPORTED_INFECTION]
    log = replay_events(start, 100, [1.0, 2.0, 3.0], kinds)
    assert peak_index(log) == 1


def test_reporting_census_at_peak(reference_outbreak):
    index = peak_index(reference_outbreak)
    state = reference_outbreak.all_states[index]
    survey = survey_reporting_at_peak(reference_outbreak, 10000, SeededRng(0))
    assert survey.kind is SurveyKind.REPORTING_AT_PEAK
    assert survey.positives == state[1]
    assert survey.denominator == state[1] + state[2]
    assert survey.time == reference_outbreak.all_times[index]


def test_reporting_survey_without_infectious():
    log = replay_events(CompartmentState(1000, 0, 0, 0, 0), 1000, [], [])
    with pytest.raises(EmptyDenominator):
        survey_reporting_at_peak(log, 10, SeededRng(0))


def test_reporting_survey_is_unbiased():
    log = replay_events(CompartmentState(900, 40, 60, 0, 0), 1000, [], [])
    estimates = np.array([survey_reporting_at_peak(log, 200, SeededRng(seed)).estimate for seed in range(1000)])
    assert abs(estimates.mean() - 0.4) <= 3 * estimates.std(ddof=1) / np.sqrt(len(estimates))


def test_survey_counts_validated():
    with pytest.raises(ValueError):
        SurveyEstimate(SurveyKind.IMMUNITY_AT_T0, m=10, positives=11, denominator=10, estimate=1.1)
