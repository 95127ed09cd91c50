"""
Whole-horizon runs and seeded parameter sweeps of the employment rate 1 - U.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from .errors import DomainError
from .market import LaborMarket, MarketParams, MarketState, YearOutcome
from .observables import SeriesObservables, order_parameter, standard_error
from .seeding import derive_seed, make_rng

logger = logging.getLogger(__name__)

SWEEPABLE = ("alpha", "gamma", "mean_applications")


@dataclass(frozen=True)
class SweepResult:
    """
    Employment rate per grid cell.

    Attributes:
        parameter: swept parameter name
        grid: realized parameter value per cell
        employment_mean: mean of 1 - U over trials
        employment_stderr: standard error of 1 - U over trials
        trials: trials per cell
        samples: 1 - U per (cell, trial)
    """
    parameter: str
    grid: np.ndarray
    employment_mean: np.ndarray
    employment_stderr: np.ndarray
    trials: int
    samples: np.ndarray


def simulate(
    params: MarketParams,
    rng: Optional[np.random.Generator] = None,
    record_counts: bool = False,
    on_year: Optional[Callable[[MarketState, YearOutcome], None]] = None,
    progress: bool = False,
) -> SeriesObservables:
    """
    Run the market for params.horizon years.

    Args:
        params: market constants
        rng: random stream; seeded from params.seed when omitted
        record_counts: keep per-year sheet and application counts
        on_year: callback receiving the state after each year and its outcome
        progress: show a progress bar on standard error
    """
    market = LaborMarket(params, rng if rng is not None else make_rng(params.seed))
    unemployment = np.empty(params.horizon)
    sheets: List[np.ndarray] = []
    postings: List[np.ndarray] = []

    years = tqdm(range(params.horizon), desc="years", disable=not progress, leave=False)
    for t in years:
        outcome = market.advance()
        unemployment[t] = outcome.unemployment
        if record_counts:
            sheets.append(market.state.sheet_counts)
            postings.append(outcome.application_counts)
        if on_year is not None:
            on_year(market.state, outcome)

    return SeriesObservables(
        unemployment=unemployment,
        sheet_counts=np.vstack(sheets) if record_counts else None,
        application_counts=np.vstack(postings) if record_counts else None,
    )


def employment_rate(params: MarketParams) -> float:
    """1 - U for one seeded run."""
    series = simulate(params)
    return 1.0 - order_parameter(series.unemployment, params.burn_in)


def cell_params(base: MarketParams, parameter: str, value: float) -> MarketParams:
    """
    Parameters of one sweep cell.

    alpha is realized by scaling the homogeneous quota at fixed N and K, so the
    cell's actual ratio K v / N can differ slightly from the requested value.
    """
    if parameter == "alpha":
        quota = max(1, int(round(value * base.n_students / base.n_companies)))
        return base.replace(quotas=(quota,) * base.n_companies)
    if parameter == "gamma":
        return base.replace(gamma=float(value))
    if parameter == "mean_applications":
        return base.replace(mean_applications=float(value))
    raise DomainError(f"Cannot sweep {parameter!r}; choose one of {', '.join(SWEEPABLE)}")


def _realized(params: MarketParams, parameter: str) -> float:
    if parameter == "alpha":
        return params.job_offer_ratio
    return float(getattr(params, parameter))


def _run_trial(params: MarketParams, parameter: str, value: float, cell: int, trial: int) -> float:
    try:
        return employment_rate(params)
    except DomainError as e:
        raise DomainError(f"cell {cell} ({parameter}={value}), trial {trial}: {e}") from e


def parameter_sweep(
    base: MarketParams,
    parameter: str,
    grid: Sequence[float],
    trials: int = 5,
    workers: int = 1,
    tag: Optional[str] = None,
    progress: bool = False,
) -> SweepResult:
    """
    Employment rate over a parameter grid.

    Trial j of cell i is seeded with derive_seed(base.seed, tag, i, j), so the
    result is the same for any worker count.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if len(grid) < 1:
        raise DomainError("Sweep grid is empty")
    tag = tag or parameter

    cells = [cell_params(base, parameter, value) for value in grid]
    tasks = [
        delayed(_run_trial)(cell.replace(seed=derive_seed(base.seed, tag, i, j)), parameter, grid[i], i, j)
        for i, cell in enumerate(cells)
        for j in range(trials)
    ]
    logger.info(f"Sweeping {parameter} over {len(cells)} cells x {trials} trials with {workers} worker(s)")

    # results come back in submission order whatever the worker count
    results = Parallel(n_jobs=workers, return_as="generator")(tasks)
    samples = np.fromiter(
        tqdm(results, total=len(tasks), desc=parameter, disable=not progress),
        dtype=float,
        count=len(tasks),
    ).reshape(len(cells), trials)
    return SweepResult(
        parameter=parameter,
        grid=np.array([_realized(cell, parameter) for cell in cells]),
        employment_mean=samples.mean(axis=1),
        employment_stderr=np.array([standard_error(row) for row in samples]),
        trials=trials,
        samples=samples,
    )


def beveridge_sweep(base: MarketParams, alpha_grid: Sequence[float], trials: int = 5, **kwargs) -> SweepResult:
    """1 - U against the job offer ratio."""
    return parameter_sweep(base, "alpha", alpha_grid, trials, tag="beveridge", **kwargs)


def gamma_sweep(base: MarketParams, gamma_grid: Sequence[float], trials: int = 5, **kwargs) -> SweepResult:
    """1 - U against the ranking weight at fixed beta."""
    return parameter_sweep(base, "gamma", gamma_grid, trials, tag="gamma-sweep", **kwargs)
