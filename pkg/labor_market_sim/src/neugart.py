"""
Macroscopic unemployment/inflation maps.

The unemployment rate follows U' = U + xi (1 - U) - U o with the job finding
rate o = (J_s + Gamma (m - pi)) / (U + d (1 - U)). Inflation is tied to the
expected inflation through bargained wages, and expectations adapt as
pi_e' = c1 pi + (1 - c1) pi_e. Eliminating pi_e gives a closed map for pi
that contains a one-step predictor of next year's unemployment.
"""

import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .sweeps import simulate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NeugartParams:
    """
    Attributes:
        xi: job separation rate
        d: weight of on-the-job searchers
        c1: expectation adjustment weight
        c2: wage bargaining slope
        mu: base wage parameter, w_p = 1 - mu
        vacancy_response: Gamma, response of openings to m - pi
        delta: scaling factor of the inflation equation
        m: growth rate of money
        job_openings: constant openings J_s; None means J_s*
    """
    xi: float = 0.18
    d: float = 0.01
    c1: float = 0.5
    c2: float = 0.5
    mu: float = 0.04
    vacancy_response: float = 0.5
    delta: float = 2.0
    m: float = 0.03
    job_openings: Optional[float] = None

    def __post_init__(self):
        for name in ("xi", "d", "c1", "c2"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {value}")
        if not 0.0 < self.mu < 1.0:
            raise DomainError(f"mu must lie in (0, 1), got {self.mu}")
        if self.delta == 0:
            raise DomainError("delta must be non-zero")
        if self.vacancy_response < 0:
            raise DomainError(f"vacancy_response must be non-negative, got {self.vacancy_response}")
        if self.job_openings is not None and self.job_openings < 0:
            raise DomainError(f"job_openings must be non-negative, got {self.job_openings}")

    @property
    def js(self) -> float:
        if self.job_openings is None:
            return js_star(self, fixed_point(self)[0])
        return self.job_openings

    def with_js_star(self) -> "NeugartParams":
        """Parameters with J_s set so that the fixed point is stationary."""
        return replace(self, job_openings=js_star(self, fixed_point(self)[0]))

    def replace(self, **changes) -> "NeugartParams":
        return replace(self, **changes)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "xi": self.xi, "d": self.d, "c1": self.c1, "c2": self.c2, "mu": self.mu,
            "vacancy_response": self.vacancy_response, "delta": self.delta, "m": self.m,
            "job_openings": self.job_openings,
        }


@dataclass(frozen=True)
class MacroState:
    U: float
    pi: float
    pi_e: float


@dataclass(frozen=True)
class MacroTrajectory:
    """Recorded (U, pi, pi_e) per step and how often U had to be clamped."""
    U: np.ndarray
    pi: np.ndarray
    pi_e: np.ndarray
    clamp_events: int = 0

    @property
    def final(self) -> MacroState:
        return MacroState(U=float(self.U[-1]), pi=float(self.pi[-1]), pi_e=float(self.pi_e[-1]))

    def __len__(self) -> int:
        return len(self.U)


def _resolved(params: NeugartParams) -> NeugartParams:
    return params.with_js_star() if params.job_openings is None else params


def job_finding_rate(U: float, pi: float, params: NeugartParams) -> float:
    """o = (J_s + Gamma (m - pi)) / (U + d (1 - U))."""
    searchers = U + params.d * (1.0 - U)
    if searchers <= 0:
        raise DomainError(f"No job searchers at U={U}, d={params.d}")
    return (params.js + params.vacancy_response * (params.m - pi)) / searchers


def predicted_unemployment(U: float, pi: float, params: NeugartParams) -> float:
    """The unemployment map without clamping."""
    return U + params.xi * (1.0 - U) - U * job_finding_rate(U, pi, params)


def inflation_update(
    U: float, pi: float, params: NeugartParams, next_unemployment: Optional[float] = None
) -> float:
    """
    Next-year inflation with the expected inflation eliminated.

    The map contains next year's unemployment. It is predicted from (U, pi)
    by the unemployment map unless next_unemployment supplies it.
    """
    p = params
    wage_gap = (p.mu - (1.0 - p.c2) * U) / (1.0 - p.mu)
    expectation = p.c1 * pi + (1.0 - p.c1) * (p.delta * pi - wage_gap)
    if next_unemployment is None:
        next_unemployment = predicted_unemployment(U, pi, p)
    predictor = (1.0 - p.c2) / (1.0 - p.mu) * next_unemployment
    return (p.mu / (1.0 - p.mu) + expectation - predictor) / p.delta


def expected_inflation_update(pi: float, pi_e: float, params: NeugartParams) -> float:
    return params.c1 * pi + (1.0 - params.c1) * pi_e


def _advance(state: MacroState, params: NeugartParams) -> Tuple[MacroState, bool]:
    raw_u = predicted_unemployment(state.U, state.pi, params)
    new_u = min(1.0, max(0.0, raw_u))
    new_state = MacroState(
        U=new_u,
        pi=inflation_update(state.U, state.pi, params),
        pi_e=expected_inflation_update(state.pi, state.pi_e, params),
    )
    return new_state, new_u != raw_u


def macro_step(state: MacroState, params: NeugartParams) -> MacroState:
    """One step of both maps; U is clamped to [0, 1]."""
    return _advance(state, params)[0]


def fixed_point(params: NeugartParams) -> Tuple[float, float]:
    """
    (U*, pi*) = ((mu - m (delta - 1)(1 - mu)) / (1 - c2), m).
    """
    p = params
    if p.c2 == 1.0:
        raise DomainError("Fixed point diverges for c2 = 1")
    u_star = (p.mu - p.m * (p.delta - 1.0) * (1.0 - p.mu)) / (1.0 - p.c2)
    if not 0.0 < u_star < 1.0:
        raise DomainError(f"Fixed-point unemployment {u_star:.6g} lies outside (0, 1)")
    return u_star, p.m


def js_star(params: NeugartParams, U_star: float) -> float:
    """Job openings that make U* stationary: xi (1 - U*)(U* + d (1 - U*)) / U*."""
    if not 0.0 < U_star < 1.0:
        raise DomainError(f"U* must lie in (0, 1), got {U_star}")
    return params.xi * (1.0 - U_star) * (U_star + params.d * (1.0 - U_star)) / U_star


def stationary_inflation(U: float, params: NeugartParams, lookahead: bool = False) -> float:
    """
    The inflation rate the pi map holds fixed while U is held at a constant.

    The map is affine in pi, pi' = A + B pi, so the answer is A / (1 - B).
    With lookahead the constant U also stands in for next year's unemployment,
    and the answer is (mu - (1 - c2) U) / ((delta - 1)(1 - mu)) for every U.
    Without it that closed form only holds at U = U* with J_s = J_s*.
    """
    following = U if lookahead else None
    intercept = inflation_update(U, 0.0, params, following)
    slope = inflation_update(U, 1.0, params, following) - intercept
    if slope == 1.0:
        raise DomainError(f"Inflation map has no isolated fixed point at U={U}")
    return intercept / (1.0 - slope)


def default_initial_state(params: NeugartParams) -> MacroState:
    """(U* + 0.05, 0, 0), an offset from the fixed point that exposes the attractor."""
    u_star, _ = fixed_point(params)
    return MacroState(U=min(1.0, u_star + 0.05), pi=0.0, pi_e=0.0)


def run_macro(params: NeugartParams, initial: MacroState, T: int) -> MacroTrajectory:
    """Iterate macro_step T times, recording every new state."""
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    params = _resolved(params)
    U = np.empty(T)
    pi = np.empty(T)
    pi_e = np.empty(T)
    clamps = 0
    state = initial
    for t in range(T):
        state, clamped = _advance(state, params)
        clamps += clamped
        U[t], pi[t], pi_e[t] = state.U, state.pi, state.pi_e
    if clamps:
        logger.warning(f"Unemployment clamped to [0, 1] in {clamps} of {T} steps")
    return MacroTrajectory(U=U, pi=pi, pi_e=pi_e, clamp_events=clamps)


def drive_inflation(
    unemployment: Sequence[float],
    params: NeugartParams,
    pi0: float = 0.0,
    pi_e0: Optional[float] = None,
    lookahead: bool = False,
) -> MacroTrajectory:
    """
    Run the inflation map on an exogenous unemployment series.

    Records (U_t, pi_t) and then moves pi to pi_{t+1} using U_t.

    Args:
        unemployment: U_t series
        params: macro constants
        pi0: initial inflation
        pi_e0: initial expected inflation, pi0 when omitted
        lookahead: take next year's unemployment inside the pi map from the
            series (U_{t+1}) instead of the macroscopic unemployment map
    """
    params = _resolved(params)
    unemployment = np.asarray(unemployment, dtype=float)
    pi = np.empty(unemployment.size)
    pi_e = np.empty(unemployment.size)
    current_pi = pi0
    current_pi_e = pi0 if pi_e0 is None else pi_e0
    for t, u in enumerate(unemployment):
        pi[t], pi_e[t] = current_pi, current_pi_e
        if t + 1 == unemployment.size:
            break
        following = unemployment[t + 1] if lookahead else None
        current_pi, current_pi_e = (
            inflation_update(u, current_pi, params, following),
            expected_inflation_update(current_pi, current_pi_e, params),
        )
    return MacroTrajectory(U=unemployment.copy(), pi=pi, pi_e=pi_e)


def coupled_run(market_params, params: NeugartParams, T: Optional[int] = None,
                pi0: Optional[float] = None, lookahead: bool = True,
                progress: bool = False) -> MacroTrajectory:
    """
    Microscopic unemployment driving the inflation map.

    The market produces U_t every business year. By default pi_{t+1} is
    computed from the simulated U_t and U_{t+1}, so the macroscopic
    unemployment map is replaced everywhere. With lookahead=False next year's
    unemployment is instead predicted by the macroscopic map at U_t.

    Args:
        market_params: MarketParams of the microscopic market
        params: macro constants; J_s defaults to J_s*
        T: number of years, market_params.horizon when omitted
        pi0: initial inflation, pi* when omitted
        lookahead: use the simulated U_{t+1} inside the pi map
        progress: show a progress bar on standard error
    """
    horizon = market_params.horizon if T is None else T
    if horizon < 1:
        raise DomainError(f"T must be >= 1, got {horizon}")
    if horizon != market_params.horizon:
        market_params = market_params.replace(horizon=horizon, burn_in=0)
    params = _resolved(params)
    start = fixed_point(params)[1] if pi0 is None else pi0
    logger.info(f"Coupled run: {horizon} years, J_s={params.js:.6g}, pi0={start}")
    # inflation does not feed back on the market, so U can be simulated first
    series = simulate(market_params, progress=progress)
    return drive_inflation(series.unemployment, params, pi0=start, lookahead=lookahead)
