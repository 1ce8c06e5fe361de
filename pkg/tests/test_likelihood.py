import math

import numpy as np
import pytest

from sir_ident.errors import LogDomainError
from sir_ident.inference.likelihood import (
    LikelihoodInput,
    beta_star_mle,
    finite_difference_gradient,
    finite_difference_hessian,
    gradient,
    hessian,
    likelihood_input_from_log,
    log_likelihood,
    max_relative_error,
)
from sir_ident.model.gillespie import EventKind, replay_events, simulate
from sir_ident.model.parameters import CompartmentState
from sir_ident.util.seeding import SeededRng


def quiet_window(duration=5.0, prevalence=10.0, splits=1):
    """No reported infections; I_r constant over the window."""
    return LikelihoodInput(
        n=1000,
        horizon=duration,
        gamma=1.0,
        infection_times=np.empty(0),
        prevalence_before=np.empty(0),
        n1_before=np.empty(0),
        segment_durations=np.full(splits, duration / splits),
        segment_ir=np.full(splits, prevalence),
        segment_n1=np.zeros(splits),
    )


@pytest.fixture(scope="module")
def outbreak_data(reference_outbreak):
    return likelihood_input_from_log(reference_outbreak, 1.0)


def test_quiet_window_closed_form():
    data = quiet_window()
    assert log_likelihood(data, 1.9, 0.4, 0.3) == pytest.approx(-1.9 / 0.4 * 10 * 0.7 * 5)
    grad = gradient(data, 1.9, 0.4, 0.3)
    assert grad[0] == pytest.approx(-10 * 0.7 * 5 / 0.4)
    assert grad[0] < 0
    assert beta_star_mle(data, 0.4, 0.3) == 0.0


def test_splitting_a_segment_changes_nothing():
    whole = quiet_window(splits=1)
    split = quiet_window(splits=4)
    assert log_likelihood(split, 1.9, 0.4, 0.3) == pytest.approx(log_likelihood(whole, 1.9, 0.4, 0.3), rel=1e-12)


def test_input_from_log(reference_outbreak, outbreak_data):
    data = outbreak_data
    n1 = np.count_nonzero(reference_outbreak.kinds == EventKind.REPORTED_INFECTION)
    assert 0 < data.reported_count <= n1
    np.testing.assert_array_equal(data.n1_before, np.arange(data.reported_count))
    assert np.all(data.prevalence_before >= 1)
    assert data.segment_durations.sum() == pytest.approx(data.horizon)
    assert data.prevalence_integral() > 0
    assert data.weighted_prevalence_integral() > 0


def test_explicit_horizon_limits_the_window(reference_outbreak):
    horizon = float(reference_outbreak.times[200])
    data = likelihood_input_from_log(reference_outbreak, 1.0, horizon)
    assert data.horizon == horizon
    assert np.all(data.infection_times <= horizon)
    assert data.segment_durations.sum() == pytest.approx(horizon)


def test_window_cut_at_unexplained_report():
    start = CompartmentState(97, 1, 2, 0, 0)
    kinds = [EventKind.REPORTED_INFECTION, EventKind.REPORTED_RECOVERY, EventKind.REPORTED_RECOVERY,
             EventKind.REPORTED_INFECTION, EventKind.UNREPORTED_RECOVERY]
    log = replay_events(start, 100, [1.0, 2.0, 3.0, 4.0, 5.0], kinds)
    data = likelihood_input_from_log(log, 1.0)
    assert data.horizon == 4.0
    assert data.reported_count == 1
    with pytest.raises(LogDomainError):
        likelihood_input_from_log(log, 1.0, horizon=4.5)


def test_mle_is_stationary(outbreak_data):
    beta = beta_star_mle(outbreak_data, 0.4, 0.3)
    assert beta == pytest.approx(1.9, abs=0.5)
    scale = outbreak_data.reported_count / (0.4 * beta)
    assert abs(gradient(outbreak_data, beta, 0.4, 0.3)[0]) <= 1e-10 * scale


def test_doubling_beta(outbreak_data):
    data, p, pi = outbreak_data, 0.4, 0.3
    survival = (1.0 - pi) * data.prevalence_integral() - data.weighted_prevalence_integral() / p
    change = log_likelihood(data, 3.8, p, pi) - log_likelihood(data, 1.9, p, pi)
    expected = data.reported_count * math.log(2.0) / p - 1.9 * survival / p
    assert change == pytest.approx(expected, rel=1e-9)


def test_log_domain_errors(outbreak_data):
    with pytest.raises(LogDomainError):
        log_likelihood(outbreak_data, 1.9, 0.1, 0.3)
    with pytest.raises(LogDomainError):
        log_likelihood(outbreak_data, 0.0, 0.4, 0.3)
    with pytest.raises(LogDomainError):
        gradient(outbreak_data, 1.9, 1.0, 0.3)


def test_hessian_structure(outbreak_data):
    h = hessian(outbreak_data, 1.9, 0.45, 0.25)
    np.testing.assert_array_equal(h, h.T)
    assert h[0, 0] == pytest.approx(-outbreak_data.reported_count / (0.45 * 1.9 ** 2))
    assert h[0, 0] < 0
    assert h[1, 1] < 0


def random_interior_points(data, count, seed):
    rng = np.random.default_rng(seed)
    reach = data.n1_before[-1] / data.n
    points = []
    while len(points) < count:
        beta, p, pi = rng.uniform(1.5, 2.5), rng.uniform(0.35, 0.7), rng.uniform(0.05, 0.4)
        if p * (1.0 - pi) >= reach + 0.05:
            points.append((beta, pi, p))
    return points


def test_gradient_matches_finite_differences(outbreak_data):
    for beta, pi, p in random_interior_points(outbreak_data, 20, seed=21):
        analytic = gradient(outbreak_data, beta, p, pi)
        numeric = finite_difference_gradient(outbreak_data, (beta, pi, p))
        assert max_relative_error(analytic, numeric) <= 1e-5


def test_hessian_matches_finite_differences(outbreak_data):
    for beta, pi, p in random_interior_points(outbreak_data, 20, seed=22):
        analytic = hessian(outbreak_data, beta, p, pi)
        numeric = finite_difference_hessian(outbreak_data, (beta, pi, p))
        assert max_relative_error(analytic, numeric) <= 1e-4


def test_finite_differences_at_zero_immunity(outbreak_data):
    analytic = gradient(outbreak_data, 1.9, 0.5, 0.0)
    numeric = finite_difference_gradient(outbreak_data, (1.9, 0.0, 0.5))
    assert max_relative_error(analytic, numeric) <= 1e-5


def test_max_relative_error():
    assert max_relative_error([1.0, 200.0], [1.0, 100.0]) == pytest.approx(1.0)
    assert max_relative_error([0.5], [0.0]) == pytest.approx(0.5)


@pytest.mark.slow
def test_mle_is_close_to_true_beta_over_outbreaks(reference_params, reference_init):
    estimates = []
    seed = 100
    while len(estimates) < 20:
        log = simulate(reference_params, reference_init, rng=SeededRng(seed))
        seed += 1
        if np.count_nonzero(log.kinds == EventKind.REPORTED_INFECTION) < 500:
            continue
        estimates.append(beta_star_mle(likelihood_input_from_log(log, 1.0), 0.4, 0.3))
    assert np.mean(estimates) == pytest.approx(1.9, abs=0.1)
