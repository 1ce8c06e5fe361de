import numpy as np
import pytest

from sir_ident.errors import InfeasibleInitialState, InvalidParameters
from sir_ident.model.parameters import (
    CompartmentState,
    InitialConditions,
    ModelParams,
    derived_rates,
    effective_beta,
    initial_compartments,
)
from sir_ident.util.seeding import SeededRng, mix


def test_effective_beta_reference(reference_params):
    assert effective_beta(reference_params) == pytest.approx(1.9, abs=1e-12)
    assert reference_params.beta_star == pytest.approx(1.9, abs=1e-12)


def test_derived_rates_reference(reference_params):
    rates = derived_rates(reference_params)
    assert rates.r0 == pytest.approx(1.9, abs=1e-12)
    assert rates.re == pytest.approx(1.33, abs=1e-12)
    assert rates.rho == pytest.approx(0.33, abs=1e-12)


def test_derived_identities_hold_exactly():
    rng = np.random.default_rng(3)
    for _ in range(50):
        params = ModelParams(rng.uniform(0, 4), rng.uniform(0, 4), rng.uniform(0.01, 1), rng.uniform(0, 0.99),
                             rng.uniform(0.1, 3))
        rates = derived_rates(params)
        assert rates.re == rates.r0 * (1.0 - params.pi)
        assert rates.rho == params.gamma * (rates.re - 1.0)


def test_initial_compartments_reference(reference_params, reference_init):
    state = initial_compartments(reference_params, reference_init, integer=True)
    assert (state.s, state.i_r, state.i_u, state.r_r, state.r_u) == (6975, 10, 15, 1200, 1800)
    assert state.total == 10000

    real = initial_compartments(reference_params, reference_init)
    assert real.s == pytest.approx(6975.0)
    assert real.i_u == pytest.approx(15.0)
    assert real.total == pytest.approx(10000.0)


def test_full_reporting_without_immunity_has_no_hidden_compartments():
    params = ModelParams(2.0, 2.0, 1.0, 0.0, 1.0)
    state = initial_compartments(params, InitialConditions(n=1000, i0=0.01), integer=True)
    assert state.i_u == 0 and state.r_r == 0 and state.r_u == 0
    assert state.s == 990


@pytest.mark.parametrize("kwargs", [
    dict(p=0.0),
    dict(p=1.5),
    dict(pi=1.0),
    dict(pi=-0.1),
    dict(gamma=0.0),
    dict(beta_r=-1.0),
    dict(beta_u=float("nan")),
])
def test_invalid_parameters_rejected(kwargs):
    values = dict(beta_r=2.5, beta_u=1.5, p=0.4, pi=0.3, gamma=1.0)
    values.update(kwargs)
    with pytest.raises(InvalidParameters):
        ModelParams(**values)


def test_invalid_parameters_is_a_value_error():
    with pytest.raises(ValueError):
        ModelParams(1.0, 1.0, 0.0, 0.0, 1.0)


def test_initial_conditions_validated():
    with pytest.raises(InvalidParameters):
        InitialConditions(n=0, i0=0.01)
    with pytest.raises(InvalidParameters):
        InitialConditions(n=100, i0=0.0)


def test_infeasible_initial_state():
    params = ModelParams(2.5, 1.5, 0.1, 0.95, 1.0)
    with pytest.raises(InfeasibleInitialState):
        initial_compartments(params, InitialConditions(n=1000, i0=0.01))


def test_from_effective_and_with_effective(reference_params):
    same = ModelParams.from_effective(1.9, 0.4, 0.3, 1.0)
    assert same.beta_r == same.beta_u == 1.9
    assert same.beta_star == pytest.approx(1.9)

    scaled = reference_params.with_effective(3.8)
    assert scaled.beta_star == pytest.approx(3.8)
    assert scaled.beta_r / scaled.beta_u == pytest.approx(reference_params.beta_r / reference_params.beta_u)


def test_compartment_state_array_helpers():
    state = CompartmentState(1, 2, 3, 4, 5)
    assert state.total == 15
    assert state.infectious == 5
    assert CompartmentState.from_array(state.as_array()) == CompartmentState(1.0, 2.0, 3.0, 4.0, 5.0)


@pytest.mark.parametrize("values", [(-1, 2, 0, 0, 0), (5, 0, -0.5, 0, 0), (5, 0, 0, 0, float("nan"))])
def test_compartment_state_rejects_negative_occupancy(values):
    with pytest.raises(InvalidParameters):
        CompartmentState(*values)


def test_seed_derivation_is_deterministic():
    assert mix(8402, 7) == mix(8402, 7)
    assert mix(8402, 7) != mix(8402, 8)
    assert mix(8402, 7) != mix(8403, 7)

    a = SeededRng(mix(8402, 7)).generator().random(5)
    b = SeededRng.for_replicate(8402, 7).generator().random(5)
    np.testing.assert_array_equal(a, b)
    assert SeededRng(5).spawn(1) != SeededRng(5).spawn(2)


def test_seed_range_checked():
    with pytest.raises(ValueError):
        SeededRng(-1)
    with pytest.raises(ValueError):
        SeededRng(1 << 64)
