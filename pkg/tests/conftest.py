import pytest

from sir_ident.experiments.harness import ExperimentConfig, run_experiment
from sir_ident.model.gillespie import final_reported_fraction, simulate
from sir_ident.model.parameters import InitialConditions, ModelParams
from sir_ident.util.seeding import SeededRng

REFERENCE = dict(beta_r=2.5, beta_u=1.5, p=0.4, pi=0.3, gamma=1.0)


@pytest.fixture
def reference_params():
    return ModelParams(**REFERENCE)


@pytest.fixture
def reference_init():
    return InitialConditions(n=10000, i0=0.001)


def first_major_outbreak(params, init, threshold=0.05, start_seed=0):
    """Simulate seeds start_seed, start_seed + 1, ... until one is a major outbreak."""
    for seed in range(start_seed, start_seed + 200):
        log = simulate(params, init, rng=SeededRng(seed))
        if final_reported_fraction(log) >= threshold:
            return log
    raise RuntimeError("no major outbreak in 200 seeds")


@pytest.fixture(scope="session")
def small_report():
    """A three-outbreak experiment on a population of 2000."""
    config = ExperimentConfig(params=ModelParams(**REFERENCE), init=InitialConditions(n=2000, i0=0.005), survey_size=200,
                              target_outbreaks=3, master_seed=77, num_workers=0)
    return run_experiment(config, progress=False)


@pytest.fixture(scope="session")
def reference_outbreak():
    """One reference-scenario epidemic, simulated to extinction, that became a major outbreak."""
    return first_major_outbreak(ModelParams(**REFERENCE), InitialConditions(n=10000, i0=0.001))
