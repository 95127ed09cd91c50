import math

import numpy as np
import pytest
from scipy.stats import binom

from labor_market_sim.src.errors import DomainError
from labor_market_sim.src.market import MarketParams, ranking_factors
from labor_market_sim.src.observables import empty_company_fraction, expected_empty_fraction
from labor_market_sim.src.seeding import derive_seed
from labor_market_sim.src.sweeps import (
    beveridge_sweep,
    cell_params,
    employment_rate,
    gamma_sweep,
    parameter_sweep,
    simulate,
)


def sweep_market(**kwargs) -> MarketParams:
    defaults = dict(mean_applications=1.0, gamma=1.0, beta_history=(1.0,), horizon=200, seed=99)
    defaults.update(kwargs)
    return MarketParams.homogeneous(50, 500, 10, **defaults)


def test_simulate_records_counts():
    params = sweep_market(horizon=30)
    seen = []
    series = simulate(params, record_counts=True, on_year=lambda state, outcome: seen.append(state.t))
    assert series.horizon == 30
    assert series.sheet_counts.shape == (30, 50)
    assert series.application_counts.shape == (30, 500)
    assert np.array_equal(series.sheet_counts.sum(axis=1), series.application_counts.sum(axis=1))
    assert seen == list(range(1, 31))
    assert np.all((series.unemployment >= 0) & (series.unemployment <= 1))


def test_simulate_without_counts():
    series = simulate(sweep_market(horizon=5))
    assert series.sheet_counts is None and series.application_counts is None


def test_simulate_is_seeded_by_params():
    params = sweep_market(horizon=40, mean_applications=2.0)
    assert np.array_equal(simulate(params).unemployment, simulate(params).unemployment)
    other = simulate(params.replace(seed=100)).unemployment
    assert not np.array_equal(simulate(params).unemployment, other)


def test_cell_params_alpha_scales_quota():
    base = sweep_market()
    assert cell_params(base, "alpha", 2.0).quotas == (20,) * 50
    assert cell_params(base, "alpha", 2.0).job_offer_ratio == pytest.approx(2.0)
    # the quota never drops below one
    assert cell_params(base, "alpha", 0.01).job_offer_ratio == pytest.approx(0.1)


def test_cell_params_rejects_unknown_parameter():
    with pytest.raises(DomainError):
        cell_params(sweep_market(), "students", 10)


@pytest.mark.parametrize(("trials", "grid"), [(0, [1.0]), (2, [])])
def test_parameter_sweep_rejects_bad_shape(trials, grid):
    with pytest.raises(DomainError):
        parameter_sweep(sweep_market(), "gamma", grid, trials=trials)


def test_sweep_trial_seeds_derive_from_base_seed():
    base = sweep_market(horizon=60)
    result = gamma_sweep(base, [3.0], trials=1)
    direct = employment_rate(base.replace(gamma=3.0, seed=derive_seed(base.seed, "gamma-sweep", 0, 0)))
    assert result.samples[0, 0] == direct
    assert result.employment_stderr[0] == 0.0

    untagged = parameter_sweep(base, "gamma", [3.0], trials=1)
    assert untagged.samples[0, 0] == employment_rate(
        base.replace(gamma=3.0, seed=derive_seed(base.seed, "gamma", 0, 0))
    )


def test_sweep_result_independent_of_worker_count():
    base = sweep_market(horizon=40)
    serial = beveridge_sweep(base, [0.5, 1.0, 2.0], trials=2, workers=1)
    parallel = beveridge_sweep(base, [0.5, 1.0, 2.0], trials=2, workers=2)
    assert np.array_equal(serial.samples, parallel.samples)
    assert np.array_equal(serial.grid, parallel.grid)


def test_sweep_shapes():
    result = parameter_sweep(sweep_market(horizon=30), "mean_applications", [1.0, 2.0], trials=3)
    assert result.samples.shape == (2, 3)
    assert result.grid.tolist() == [1.0, 2.0]
    assert result.employment_mean == pytest.approx(result.samples.mean(axis=1))
    assert result.trials == 3


def test_beveridge_single_application_stays_low():
    result = beveridge_sweep(sweep_market(), [0.5, 1.0, 2.0, 5.0], trials=2)
    # a student sending one sheet on average has no application with probability about 1/e
    assert np.all(result.employment_mean <= 0.75)


def test_beveridge_more_applications_raise_employment():
    low = beveridge_sweep(sweep_market(mean_applications=1.0), [1.0], trials=3)
    high = beveridge_sweep(sweep_market(mean_applications=3.0), [1.0], trials=3)
    spread = math.hypot(low.employment_stderr[0], high.employment_stderr[0])
    assert high.employment_mean[0] > low.employment_mean[0] + 3 * spread


def test_gamma_sweep_collapses_onto_top_company():
    base = MarketParams.homogeneous(50, 500, 100, mean_applications=10.0, beta_history=(1.0,),
                                    horizon=200, seed=5)
    assert base.job_offer_ratio == pytest.approx(10.0)
    result = gamma_sweep(base, [1.0, 1000.0], trials=2)
    assert result.employment_mean[0] >= 0.9
    # only the top company's 100 posts get filled
    assert result.employment_mean[1] <= 0.25


def uniform_choice_unemployment(n_companies: int, n_students: int, quota: int, mean_applications: float) -> float:
    """
    Exact expected U when every company is chosen with probability 1/K.

    A student's hires at different companies are independent events, and
    given an application the student wins with probability E[min(1, v / (1 + X))]
    where X counts the other applicants.
    """
    posting = min(1.0, mean_applications / n_companies)
    others = np.arange(n_students)
    win = np.sum(binom.pmf(others, n_students - 1, posting) * np.minimum(1.0, quota / (1.0 + others)))
    return (1.0 - posting * win) ** n_companies


@pytest.mark.parametrize("applications", [1.0, 3.0])
def test_zero_gamma_is_uniform_choice(applications):
    base = MarketParams.homogeneous(50, 500, 10, mean_applications=applications, beta_history=(0.0,),
                                    horizon=50, seed=17)
    result = gamma_sweep(base, [0.0], trials=20)
    expected = 1.0 - uniform_choice_unemployment(50, 500, 10, applications)
    assert abs(result.employment_mean[0] - expected) < 3 * result.employment_stderr[0]


def test_gamma_crossover_location():
    base = MarketParams.homogeneous(50, 500, 100, mean_applications=10.0, beta_history=(1.0,),
                                    horizon=200, seed=23)
    result = gamma_sweep(base, [30.0, 100.0, 300.0], trials=2)
    # 1 - U passes through 0.5 between gamma = 100 and gamma = 300
    assert result.employment_mean[0] >= 0.85
    assert result.employment_mean[1] == pytest.approx(0.66, abs=0.05)
    assert result.employment_mean[2] == pytest.approx(0.375, abs=0.05)


def test_residual_employment_at_strong_ranking():
    result = gamma_sweep(sweep_market(), [1000.0], trials=2)
    assert result.employment_mean[0] == pytest.approx(10 / 500, abs=0.01)


@pytest.mark.parametrize("gamma", [1.0, 5.0])
@pytest.mark.parametrize(
    ("companies", "students"), [(200, 500), pytest.param(1000, 10000, marks=pytest.mark.slow)]
)
def test_empty_company_fraction_matches_prediction(gamma, companies, students):
    params = MarketParams.homogeneous(companies, students, 2, mean_applications=1.0, gamma=gamma,
                                      beta_history=(0.0,), horizon=200, seed=31)
    series = simulate(params, record_counts=True)
    empty = empty_company_fraction(series.sheet_counts)

    eps = ranking_factors(params.n_companies)
    P = eps ** gamma / np.sum(eps ** gamma)
    predicted = expected_empty_fraction(P, params.mean_applications, params.n_students)
    stderr = empty.std(ddof=1) / math.sqrt(empty.size)
    assert abs(empty.mean() - predicted) < 3 * stderr
