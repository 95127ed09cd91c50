"""
Time-series observables of the labor market and the closed-form estimates
they are checked against.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SeriesObservables:
    """
    Per-year output of a simulation run.

    Attributes:
        unemployment: U_t for every simulated year
        sheet_counts: v_k(t) as a (T, K) array, only when counts were recorded
        application_counts: sheets posted per student as a (T, N) array,
            only when counts were recorded
    """
    unemployment: np.ndarray
    sheet_counts: Optional[np.ndarray] = None
    application_counts: Optional[np.ndarray] = None

    @property
    def horizon(self) -> int:
        return len(self.unemployment)


@dataclass(frozen=True)
class Histogram:
    """Normalized frequency histogram over integer values."""
    support: np.ndarray
    mass: np.ndarray

    def as_dict(self) -> Dict[int, float]:
        return {int(value): float(mass) for value, mass in zip(self.support, self.mass)}


class HistogramAccumulator:
    """
    Streaming integer histogram.

    Long distribution runs (10^4 years of 10^4 students) cannot keep the raw
    series in memory, so counts are folded in year by year.
    """

    def __init__(self):
        self._counts = np.zeros(0, dtype=np.int64)

    def add(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=np.int64).ravel()
        if values.size == 0:
            return
        if values.min() < 0:
            raise DomainError("Histogram values must be non-negative")
        counts = np.bincount(values)
        if len(counts) > len(self._counts):
            counts[: len(self._counts)] += self._counts
            self._counts = counts
        else:
            self._counts[: len(counts)] += counts

    @property
    def total(self) -> int:
        return int(self._counts.sum())

    def to_histogram(self) -> Histogram:
        if self.total == 0:
            raise DomainError("Cannot build a histogram from an empty series")
        support = np.flatnonzero(self._counts)
        return Histogram(support=support, mass=self._counts[support] / self.total)


def unemployment_rate(acceptance_counts: np.ndarray) -> float:
    """Fraction of students holding no acceptance."""
    acceptance_counts = np.asarray(acceptance_counts)
    if acceptance_counts.size == 0:
        raise DomainError("Unemployment rate needs at least one student")
    return float(np.count_nonzero(acceptance_counts == 0) / acceptance_counts.size)


def order_parameter(unemployment: Sequence[float], burn_in: int = 0) -> float:
    """
    Long-run average of U_t, skipping the first burn_in years.

    Args:
        unemployment: U_t series
        burn_in: number of leading years to discard
    """
    series = np.asarray(unemployment, dtype=float)
    if burn_in < 0:
        raise DomainError(f"burn_in must be non-negative, got {burn_in}")
    effective = series[burn_in:]
    if effective.size == 0:
        raise DomainError(
            f"No years left to average: series length {series.size}, burn_in {burn_in}"
        )
    return float(effective.mean())


def empirical_distribution(series: Sequence[int]) -> Histogram:
    values = np.asarray(series)
    if values.size == 0:
        raise DomainError("Cannot build a distribution from an empty series")
    support, counts = np.unique(values.astype(np.int64), return_counts=True)
    return Histogram(support=support, mass=counts / values.size)


def _check_company(k: int, n_companies: int) -> None:
    if n_companies < 1 or not 1 <= k <= n_companies:
        raise DomainError(f"Company index {k} outside 1..{n_companies}")


def analytic_pk(k: int, n_companies: int, gamma: float) -> float:
    """
    Thermodynamic-limit estimate of the probability that company k is chosen
    when the mismatch feedback is negligible.
    """
    _check_company(k, n_companies)
    if gamma < 0:
        raise DomainError(f"gamma must be non-negative, got {gamma}")
    # log space: ratio^gamma and 2^(gamma+1) overflow a float beyond gamma ~ 1023
    spread = (gamma + 1.0) * np.log(2.0)
    log_pk = (
        np.log(gamma + 1.0) - np.log(n_companies)
        + gamma * np.log1p(k / n_companies)
        - spread - np.log(-np.expm1(-spread))
    )
    return float(np.exp(log_pk))


def analytic_p_empty(
    mean_applications: float,
    n_students: int,
    n_companies: int,
    gamma: float,
    which: str = "highest",
) -> float:
    """
    Probability that the highest- or lowest-ranking company receives no entry
    sheet in a year, in the large-market limit.
    """
    if mean_applications <= 0 or n_students <= 0 or n_companies <= 0:
        raise DomainError("a, N and K must be positive")
    if gamma < 0:
        raise DomainError(f"gamma must be non-negative, got {gamma}")
    if which not in ("highest", "lowest"):
        raise DomainError(f"which must be 'highest' or 'lowest', got {which!r}")
    if np.isinf(gamma):
        return 0.0 if which == "highest" else 1.0
    load = mean_applications * n_students * (gamma + 1.0) / n_companies
    if which == "highest":
        return float(np.exp(-load / 2.0))
    # 2^(gamma+1) overflows to inf for huge gamma, giving exp(-0) = 1
    with np.errstate(over="ignore"):
        spread = np.exp2(gamma + 1.0)
    return float(np.exp(-load / spread))


def residual_employment(quota: int, n_students: int) -> float:
    """Employment floor v/N reached when every student targets the top company."""
    if n_students <= 0:
        raise DomainError("N must be positive")
    if not 0 <= quota <= n_students:
        raise DomainError(f"quota {quota} must lie in 0..{n_students}")
    return quota / n_students


def empty_company_fraction(sheet_counts: np.ndarray) -> np.ndarray:
    """Per-year fraction of companies that received no entry sheet."""
    sheet_counts = np.atleast_2d(sheet_counts)
    return np.mean(sheet_counts == 0, axis=1)


def expected_empty_fraction(
    probabilities: np.ndarray, mean_applications: float, n_students: int
) -> float:
    """Company average of exp(-N min(1, a P_k))."""
    load = np.minimum(1.0, mean_applications * np.asarray(probabilities, dtype=float))
    return float(np.mean(np.exp(-n_students * load)))


def standard_error(samples: Sequence[float]) -> float:
    """Standard error of the mean; zero for a single sample."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 2:
        return 0.0
    return float(samples.std(ddof=1) / np.sqrt(samples.size))
