"""
One business year of the probabilistic labor market.

Companies k = 1..K are ranked by eps_k = 1 + k/K. Every year each company
gets an energy from its ranking and its recent quota mismatch, students post
entry sheets according to the Boltzmann-Gibbs weights exp(-E_k)/Z, and
over-subscribed companies pick their quota of winners uniformly at random.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import softmax

from .errors import DomainError
from .observables import unemployment_rate
from .seeding import make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MarketParams:
    """
    Constants of the microscopic market.

    Attributes:
        n_companies: K
        n_students: N
        quotas: v*_k per company
        mean_applications: a, the mean number of entry sheets per student
        gamma: ranking weight
        beta_history: (beta_1, ..., beta_tau) weights of past mismatches
        horizon: number of business years T
        burn_in: leading years dropped from long-run averages
        seed: 64-bit seed of the run's random stream
    """
    n_companies: int
    n_students: int
    quotas: Tuple[int, ...]
    mean_applications: float = 1.0
    gamma: float = 1.0
    beta_history: Tuple[float, ...] = (1.0,)
    horizon: int = 2000
    burn_in: int = 0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "quotas", tuple(int(q) for q in self.quotas))
        object.__setattr__(self, "beta_history", tuple(float(b) for b in self.beta_history))
        if self.n_companies < 1:
            raise DomainError(f"n_companies must be >= 1, got {self.n_companies}")
        if self.n_students < 1:
            raise DomainError(f"n_students must be >= 1, got {self.n_students}")
        if len(self.quotas) != self.n_companies:
            raise DomainError(
                f"Expected {self.n_companies} quotas, got {len(self.quotas)}"
            )
        if min(self.quotas) < 1:
            raise DomainError("Every quota must be a positive integer")
        if not self.mean_applications > 0:
            raise DomainError(f"mean_applications must be positive, got {self.mean_applications}")
        if self.gamma < 0:
            raise DomainError(f"gamma must be non-negative, got {self.gamma}")
        if len(self.beta_history) < 1:
            raise DomainError("beta_history needs at least one weight")
        if self.horizon < 1:
            raise DomainError(f"horizon must be >= 1, got {self.horizon}")
        if not 0 <= self.burn_in < self.horizon:
            raise DomainError(f"burn_in must lie in 0..horizon-1, got {self.burn_in}")
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @classmethod
    def homogeneous(cls, n_companies: int, n_students: int, quota: int, **kwargs) -> "MarketParams":
        """Market where every company has the same quota v."""
        return cls(n_companies=n_companies, n_students=n_students,
                   quotas=(quota,) * n_companies, **kwargs)

    @property
    def total_vacancies(self) -> int:
        return sum(self.quotas)

    @property
    def job_offer_ratio(self) -> float:
        return self.total_vacancies / self.n_students

    @property
    def history_length(self) -> int:
        return len(self.beta_history)

    def replace(self, **changes) -> "MarketParams":
        return replace(self, **changes)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "n_companies": self.n_companies,
            "n_students": self.n_students,
            "quotas": list(self.quotas),
            "mean_applications": self.mean_applications,
            "gamma": self.gamma,
            "beta_history": list(self.beta_history),
            "horizon": self.horizon,
            "burn_in": self.burn_in,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class MarketState:
    """
    Market state at the start of business year t.

    mismatch_history[l] holds h_k(t-1-l), so row 0 is last year's mismatch.
    """
    t: int
    sheet_counts: np.ndarray
    mismatch_history: np.ndarray
    acceptance_counts: np.ndarray
    rng_state: Optional[Dict[str, Any]] = field(default=None, compare=False)


@dataclass(frozen=True)
class YearOutcome:
    probabilities: np.ndarray
    applications: np.ndarray
    hires: np.ndarray
    unemployment: float

    @property
    def application_counts(self) -> np.ndarray:
        """Entry sheets posted by each student."""
        return self.applications.sum(axis=1)


def ranking_factor(k: int, n_companies: int) -> float:
    """eps_k = 1 + k/K; company K ranks highest."""
    if n_companies < 1 or not 1 <= k <= n_companies:
        raise DomainError(f"Company index {k} outside 1..{n_companies}")
    return 1.0 + k / n_companies


def ranking_factors(n_companies: int) -> np.ndarray:
    if n_companies < 1:
        raise DomainError(f"n_companies must be >= 1, got {n_companies}")
    return 1.0 + np.arange(1, n_companies + 1) / n_companies


def mismatch(v_star, v, total_vacancies):
    """
    Local mismatch |v* - v| / V. Works element-wise on arrays.
    """
    if total_vacancies <= 0:
        raise DomainError(f"Total vacancies must be positive, got {total_vacancies}")
    if np.any(np.asarray(v_star) < 0) or np.any(np.asarray(v) < 0):
        raise DomainError("Quotas and applicant counts must be non-negative")
    return np.abs(np.asarray(v_star) - np.asarray(v)) / total_vacancies


def local_energy(eps, h_hist, beta_history: Sequence[float], gamma: float):
    """
    E = -gamma log(eps) + sum_l beta_l h(t-l).

    Args:
        eps: ranking factor, scalar or one value per company
        h_hist: past mismatches with the lag on the first axis, shape (tau,)
            or (tau, K)
        beta_history: weights (beta_1, ..., beta_tau)
        gamma: ranking weight
    """
    beta = np.asarray(beta_history, dtype=float)
    h_hist = np.asarray(h_hist, dtype=float)
    if h_hist.ndim == 0 or h_hist.shape[0] != beta.size:
        raise DomainError(
            f"History of length {h_hist.shape[0] if h_hist.ndim else 0} "
            f"does not match {beta.size} beta weights"
        )
    if np.any(np.asarray(eps) <= 0):
        raise DomainError("Ranking factors must be positive")
    energy = -gamma * np.log(eps) + np.tensordot(beta, h_hist, axes=1)
    return float(energy) if np.ndim(energy) == 0 else energy


def selection_probabilities(energies) -> np.ndarray:
    """Boltzmann-Gibbs weights exp(-E_k) / Z."""
    energies = np.asarray(energies, dtype=float)
    if energies.size == 0:
        raise DomainError("Need at least one company energy")
    if not np.all(np.isfinite(energies)):
        raise DomainError("Energies must be finite")
    # softmax subtracts the maximum before exponentiating
    return softmax(-energies)


def sample_applications(
    probabilities: np.ndarray, mean_applications: float, n_students: int, rng: np.random.Generator
) -> np.ndarray:
    """
    Draw a_ik for every student-company pair.

    Each pair posts independently with probability min(1, a P_k).

    Returns:
        Boolean (N, K) matrix; row i is the set of companies student i applied to.
    """
    probabilities = np.asarray(probabilities, dtype=float)
    if mean_applications <= 0:
        raise DomainError(f"mean_applications must be positive, got {mean_applications}")
    posting = np.minimum(1.0, mean_applications * probabilities)
    return rng.random((n_students, probabilities.size)) < posting


def match(
    applications: np.ndarray, quotas: Sequence[int], rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Select winners at every company.

    Under-subscribed companies accept everybody; over-subscribed companies
    draw exactly v*_k winners uniformly without replacement. A student may
    collect several acceptances.

    Returns:
        (acceptances per student, hires per company)
    """
    applications = np.asarray(applications, dtype=bool)
    quotas = np.asarray(quotas, dtype=np.int64)
    if applications.shape[1] != quotas.size:
        raise DomainError(
            f"Applications reference {applications.shape[1]} companies, "
            f"but {quotas.size} quotas were given"
        )
    sheet_counts = applications.sum(axis=0)
    accepted = applications.copy()
    for k in np.flatnonzero(sheet_counts > quotas):
        applicants = np.flatnonzero(applications[:, k])
        winners = rng.choice(applicants, size=quotas[k], replace=False)
        accepted[applicants, k] = False
        accepted[winners, k] = True
    return accepted.sum(axis=1), np.minimum(sheet_counts, quotas)


def initial_state(params: MarketParams) -> MarketState:
    """Year 0: no history, so probabilities depend on ranking alone."""
    return MarketState(
        t=0,
        sheet_counts=np.zeros(params.n_companies, dtype=np.int64),
        mismatch_history=np.zeros((params.history_length, params.n_companies)),
        acceptance_counts=np.zeros(params.n_students, dtype=np.int64),
    )


def step(
    state: MarketState, params: MarketParams, rng: np.random.Generator
) -> Tuple[MarketState, YearOutcome]:
    """Run one business year and return the next state with the year's outcome."""
    quotas = np.asarray(params.quotas)
    energies = local_energy(
        ranking_factors(params.n_companies), state.mismatch_history,
        params.beta_history, params.gamma,
    )
    probabilities = selection_probabilities(energies)
    applications = sample_applications(
        probabilities, params.mean_applications, params.n_students, rng
    )
    acceptance_counts, hires = match(applications, quotas, rng)
    sheet_counts = applications.sum(axis=0)

    current = mismatch(quotas, sheet_counts, params.total_vacancies)
    history = np.vstack([current[np.newaxis, :], state.mismatch_history[:-1]])

    outcome = YearOutcome(
        probabilities=probabilities,
        applications=applications,
        hires=hires,
        unemployment=unemployment_rate(acceptance_counts),
    )
    next_state = MarketState(
        t=state.t + 1,
        sheet_counts=sheet_counts,
        mismatch_history=history,
        acceptance_counts=acceptance_counts,
        rng_state=rng.bit_generator.state,
    )
    return next_state, outcome


class LaborMarket:
    """
    Stateful driver around step() holding the parameters, the random stream
    and the current state.
    """

    def __init__(self, params: MarketParams, rng: Optional[np.random.Generator] = None):
        """
        Initialize the market.

        Args:
            params: market constants
            rng: random stream; seeded from params.seed when omitted
        """
        self.params = params
        self.rng = rng if rng is not None else make_rng(params.seed)
        self.state = initial_state(params)
        logger.debug(
            f"Market with K={params.n_companies}, N={params.n_students}, "
            f"alpha={params.job_offer_ratio:.4g}, a={params.mean_applications}, "
            f"gamma={params.gamma}, beta={list(params.beta_history)}"
        )

    def advance(self) -> YearOutcome:
        self.state, outcome = step(self.state, self.params, self.rng)
        return outcome
