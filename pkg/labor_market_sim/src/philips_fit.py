"""
Least-squares fit of the Philips-curve scaling form pi + b ~ U^(-c).

For a fixed offset b the fit is an ordinary linear regression of log(pi + b)
on log U. The offset enters nonlinearly, so it is found by scanning a grid of
b values and refining every local minimum of the residual sum of squares
with a golden-section search.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import minimize_scalar
from scipy.stats import linregress

from .errors import DomainError

logger = logging.getLogger(__name__)

DEFAULT_GRID_CELLS = 200
FEASIBILITY_MARGIN = 1e-6
DEFAULT_SPAN = 10.0


@dataclass(frozen=True)
class CurvePoints:
    """(U, pi) pairs with U > 0; dropped counts rows removed on construction."""
    U: np.ndarray
    pi: np.ndarray
    dropped: int = 0

    @classmethod
    def from_arrays(cls, U, pi) -> "CurvePoints":
        U = np.asarray(U, dtype=float).ravel()
        pi = np.asarray(pi, dtype=float).ravel()
        if U.shape != pi.shape:
            raise DomainError(f"U and pi lengths differ: {U.size} vs {pi.size}")
        keep = np.isfinite(U) & np.isfinite(pi) & (U > 0)
        dropped = int(U.size - keep.sum())
        if dropped:
            logger.info(f"Dropped {dropped} points with U <= 0 or non-finite values")
        return cls(U=U[keep], pi=pi[keep], dropped=dropped)

    def __len__(self) -> int:
        return len(self.U)


@dataclass(frozen=True)
class FitResult:
    """
    Attributes:
        b: offset
        c: exponent, positive for a downward-sloping curve
        log_c: intercept of log(pi + b) against log U
        sse: residual sum of squares in log space
        n: number of fitted points
        dropped: points removed before fitting
    """
    b: float
    c: float
    log_c: float
    sse: float
    n: int
    dropped: int = 0


def linear_fit_given_b(points: CurvePoints, b: float) -> Tuple[float, float, float]:
    """
    Regress log(pi + b) on log U.

    Returns:
        (c, logC, sse) with c the negated slope
    """
    if len(points) < 2:
        raise DomainError(f"Need at least two points, got {len(points)}")
    shifted = points.pi + b
    if np.any(shifted <= 0):
        raise DomainError(f"pi + b must be positive for every point (b={b})")
    x = np.log(points.U)
    if np.ptp(x) == 0:
        raise DomainError("Need at least two distinct U values")
    y = np.log(shifted)
    regression = linregress(x, y)
    residuals = y - (regression.intercept + regression.slope * x)
    return -float(regression.slope), float(regression.intercept), float(residuals @ residuals)


def feasible_interval(points: CurvePoints, b_range: Optional[Tuple[float, float]] = None) -> Tuple[float, float]:
    """
    Search interval for b, trimmed so that pi + b > 0 everywhere.

    The default is (-min pi + 1e-6, -min pi + 10].
    """
    floor = -float(points.pi.min())
    lo, hi = b_range if b_range is not None else (floor, floor + DEFAULT_SPAN)
    lo = max(lo, floor + FEASIBILITY_MARGIN)
    if lo >= hi:
        raise DomainError(f"Empty feasible b interval: need b > {floor:.6g}, got upper bound {hi:.6g}")
    return lo, hi


def fit_offset_power_law(
    points: CurvePoints,
    b_range: Optional[Tuple[float, float]] = None,
    grid_cells: int = DEFAULT_GRID_CELLS,
) -> FitResult:
    """
    Fit pi + b ~ U^(-c) over b and c.

    Args:
        points: data to fit
        b_range: (lo, hi) search interval for b
        grid_cells: number of cells of the coarse pre-scan
    """
    if len(points) < 3:
        raise DomainError(f"Need at least three points, got {len(points)}")
    lo, hi = feasible_interval(points, b_range)

    def sse(b: float) -> float:
        return linear_fit_given_b(points, b)[2]

    grid = np.linspace(lo, hi, grid_cells + 1)
    scan = np.array([sse(b) for b in grid])

    candidates = [(float(scan[i]), float(grid[i])) for i in range(len(grid))]
    for i in range(1, len(grid) - 1):
        if scan[i] < scan[i - 1] and scan[i] < scan[i + 1]:
            result = minimize_scalar(sse, bracket=(grid[i - 1], grid[i], grid[i + 1]),
                                     method="golden", options={"xtol": 1e-10})
            candidates.append((float(result.fun), float(result.x)))
    # minima on the interval ends have no bracket
    for inner, edge in ((1, 0), (-2, -1)):
        if scan[edge] < scan[inner]:
            bounds = sorted((grid[edge], grid[inner]))
            result = minimize_scalar(sse, bounds=bounds, method="bounded", options={"xatol": 1e-12})
            candidates.append((float(result.fun), float(result.x)))

    best_sse, best_b = min(candidates)
    c, log_c, best_sse = linear_fit_given_b(points, best_b)
    logger.debug(f"Best offset b={best_b:.8g} (c={c:.6g}, sse={best_sse:.3g}) in [{lo:.6g}, {hi:.6g}]")
    return FitResult(b=best_b, c=c, log_c=log_c, sse=best_sse, n=len(points), dropped=points.dropped)


def pearson_correlation(points: CurvePoints) -> float:
    """Correlation between U and pi."""
    if len(points) < 2:
        raise DomainError("Need at least two points for a correlation")
    return float(np.corrcoef(points.U, points.pi)[0, 1])


def load_curve_points(path: Union[str, Path]) -> CurvePoints:
    """
    Read (U, pi) pairs from delimiter-separated text.

    Uses the U and pi columns when a header names them, else the first two columns.
    """
    frame = pd.read_csv(path, sep=None, engine="python", comment="#")
    if {"U", "pi"}.issubset(frame.columns):
        U, pi = frame["U"], frame["pi"]
    else:
        frame = pd.read_csv(path, sep=None, engine="python", comment="#", header=None)
        if frame.shape[1] < 2:
            raise DomainError(f"{path}: expected at least two columns, found {frame.shape[1]}")
        frame = frame.apply(pd.to_numeric, errors="coerce").dropna(subset=[0, 1])
        U, pi = frame[0], frame[1]
    return CurvePoints.from_arrays(pd.to_numeric(U, errors="coerce"), pd.to_numeric(pi, errors="coerce"))
