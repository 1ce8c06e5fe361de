import numpy as np
import pytest

from sir_ident.errors import InvalidParameters, NotExtinct
from sir_ident.model.gillespie import (
    EventKind,
    compartment_table,
    counting_paths,
    final_reported_fraction,
    replay_events,
    simulate,
)
from sir_ident.model.parameters import CompartmentState, InitialConditions, ModelParams, initial_compartments
from sir_ident.util.seeding import SeededRng


def check_bookkeeping(log):
    states = log.all_states
    counts = log.counts()
    start = states[0]
    n1, n2, n3, n4 = counts.T

    assert np.all(states.sum(axis=1) == log.n)
    assert np.all(states >= 0)
    assert np.all(np.diff(log.all_times) > 0)
    np.testing.assert_array_equal(states[:, 0], start[0] - n1 - n3)
    np.testing.assert_array_equal(states[:, 1], start[1] + n1 - n2)
    np.testing.assert_array_equal(states[:, 2], start[2] + n3 - n4)
    np.testing.assert_array_equal(states[:, 3], start[3] + n2)
    np.testing.assert_array_equal(states[:, 4], start[4] + n4)


def test_same_seed_same_epidemic(reference_params, reference_init):
    a = simulate(reference_params, reference_init, rng=SeededRng(42))
    b = simulate(reference_params, reference_init, rng=SeededRng(42))
    np.testing.assert_array_equal(a.times, b.times)
    np.testing.assert_array_equal(a.kinds, b.kinds)
    np.testing.assert_array_equal(a.states, b.states)


def test_different_seeds_differ(reference_params, reference_init):
    a = simulate(reference_params, reference_init, rng=SeededRng(1))
    b = simulate(reference_params, reference_init, rng=SeededRng(2))
    assert len(a) != len(b) or not np.array_equal(a.times, b.times)


def test_bookkeeping_over_many_epidemics():
    init = InitialConditions(n=500, i0=0.01)
    for seed, beta in enumerate(np.linspace(0.5, 4.0, 20)):
        params = ModelParams(beta, 0.7 * beta, 0.5, 0.2, 1.0)
        log = simulate(params, init, rng=SeededRng(seed))
        check_bookkeeping(log)
        assert log.is_extinct
        n1, _, n3, _ = log.counts()[-1]
        assert n1 + n3 == log.initial_state.s - log.final_state.s


def test_bookkeeping_reference_outbreak(reference_outbreak):
    check_bookkeeping(reference_outbreak)
    assert reference_outbreak.initial_state == CompartmentState(6975, 10, 15, 1200, 1800)


def test_end_time_truncates(reference_params, reference_init):
    log = simulate(reference_params, reference_init, end_time=0.5, rng=SeededRng(3))
    assert np.all(log.times <= 0.5)
    assert not log.is_extinct
    with pytest.raises(NotExtinct):
        final_reported_fraction(log)


def test_end_time_must_be_positive(reference_params, reference_init):
    with pytest.raises(ValueError):
        simulate(reference_params, reference_init, end_time=0.0)


def test_subcritical_epidemic_stays_small(reference_init):
    params = ModelParams(0.5, 0.5, 0.4, 0.3, 1.0)
    for seed in range(10):
        log = simulate(params, reference_init, rng=SeededRng(seed))
        assert final_reported_fraction(log) < 0.05


def test_initial_state_override(reference_params):
    init = InitialConditions(n=100, i0=0.01)
    start = CompartmentState(95, 5, 0, 0, 0)
    log = simulate(reference_params, init, rng=SeededRng(0), initial_state=start)
    assert log.initial_state == start
    with pytest.raises(ValueError):
        simulate(reference_params, init, initial_state=CompartmentState(90, 5, 0, 0, 0))
    with pytest.raises(InvalidParameters):
        simulate(reference_params, init, initial_state=CompartmentState(96, 5, -1, 0, 0))


def test_no_infectious_gives_empty_log(reference_params):
    init = InitialConditions(n=100, i0=0.01)
    log = simulate(reference_params, init, rng=SeededRng(0), initial_state=CompartmentState(70, 0, 0, 12, 18))
    assert len(log) == 0
    assert log.is_extinct
    assert final_reported_fraction(log) == 0.0
    assert counting_paths(log).at(5.0).tolist() == [0, 0, 0, 0]


def test_zero_contact_rates_only_recover():
    params = ModelParams(0.0, 0.0, 0.4, 0.3, 1.0)
    log = simulate(params, InitialConditions(n=1000, i0=0.01), rng=SeededRng(9))
    start = log.initial_state
    assert len(log) == start.i_r + start.i_u
    assert set(log.kinds.tolist()) <= {EventKind.REPORTED_RECOVERY, EventKind.UNREPORTED_RECOVERY}
    assert log.is_extinct


def test_full_reporting_has_no_unreported_infections():
    params = ModelParams(2.0, 2.0, 1.0, 0.0, 1.0)
    log = simulate(params, InitialConditions(n=2000, i0=0.005), rng=SeededRng(4))
    assert not np.any(log.kinds == EventKind.UNREPORTED_INFECTION)
    assert log.initial_state.i_u == 0


def test_counting_paths_are_right_continuous(reference_outbreak):
    paths = counting_paths(reference_outbreak)
    counts = reference_outbreak.counts()
    t = reference_outbreak.times[10]
    np.testing.assert_array_equal(paths.at(t), counts[11])
    np.testing.assert_array_equal(paths.at(np.nextafter(t, 0.0)), counts[10])
    np.testing.assert_array_equal(paths.at(0.0), np.zeros(4))
    assert paths.n1(reference_outbreak.times[-1]) == counts[-1, 0]


def test_final_reported_fraction_counts_reported_infections(reference_outbreak):
    n1 = np.count_nonzero(reference_outbreak.kinds == EventKind.REPORTED_INFECTION)
    assert final_reported_fraction(reference_outbreak) == n1 / 10000
    assert final_reported_fraction(reference_outbreak) >= 0.05


def test_replay_reproduces_states(reference_outbreak):
    replayed = replay_events(reference_outbreak.initial_state, reference_outbreak.n, reference_outbreak.times,
                             reference_outbreak.kinds)
    np.testing.assert_array_equal(replayed.states, reference_outbreak.states)


def test_replay_rejects_bad_sequences():
    start = CompartmentState(9, 1, 0, 0, 0)
    with pytest.raises(ValueError):
        replay_events(start, 10, [1.0, 1.0], [EventKind.REPORTED_INFECTION, EventKind.REPORTED_RECOVERY])
    with pytest.raises(ValueError):
        replay_events(start, 10, [1.0, 2.0], [EventKind.REPORTED_RECOVERY, EventKind.REPORTED_RECOVERY])
    with pytest.raises(ValueError):
        replay_events(start, 10, [1.0], [])


def test_compartment_table(reference_outbreak):
    table = compartment_table(reference_outbreak)
    assert list(table.columns) == ["time", "S", "I", "R", "N1", "N2", "N3", "N4"]
    assert len(table) == len(reference_outbreak) + 1
    assert (table["S"] + table["I"] + table["R"] == 10000).all()
    assert table["I"].iloc[-1] == 0


def test_event_codes():
    assert [kind.code for kind in EventKind] == ["RI", "UI", "RR", "UR"]
    assert EventKind.from_code("UR") is EventKind.UNREPORTED_RECOVERY


@pytest.mark.slow
def test_major_outbreaks_approach_deterministic_final_size(reference_params, reference_init):
    fractions = []
    seed = 0
    while len(fractions) < 30:
        log = simulate(reference_params, reference_init, rng=SeededRng(seed))
        z_r = final_reported_fraction(log)
        if z_r >= 0.05:
            fractions.append(z_r)
        seed += 1
    assert np.mean(fractions) == pytest.approx(0.1264, abs=0.01)


@pytest.mark.slow
def test_unreported_to_reported_infections_approach_odds(reference_params, reference_init):
    ratios = []
    seed = 0
    while len(ratios) < 100:
        log = simulate(reference_params, reference_init, rng=SeededRng(seed))
        seed += 1
        if final_reported_fraction(log) < 0.05:
            continue
        n1, _, n3, _ = log.counts()[-1]
        ratios.append(n3 / n1)
    target = (1 - reference_params.p) / reference_params.p
    se = np.std(ratios, ddof=1) / np.sqrt(len(ratios))
    assert abs(np.mean(ratios) - target) <= 3 * se


def test_initial_compartments_feed_simulation(reference_params, reference_init, reference_outbreak):
    assert reference_outbreak.initial_state == initial_compartments(reference_params, reference_init, integer=True)
