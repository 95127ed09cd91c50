"""
Mode dispatch and artifact writing.

Every mode writes a comma-separated data table with one header row and a
JSON sidecar holding the resolved configuration, derived quantities, the
tool version and a timestamp. The timestamp only ever goes to the sidecar,
so rerunning a config reproduces the data table byte for byte.
"""

import csv
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from .. import __version__
from .config import RunConfig
from .errors import ConfigError, DomainError
from .market import MarketState, YearOutcome
from .neugart import (
    MacroTrajectory, coupled_run, default_initial_state, fixed_point, run_macro,
)
from .observables import Histogram, HistogramAccumulator
from .philips_fit import fit_offset_power_law, load_curve_points
from .sweeps import SweepResult, beveridge_sweep, gamma_sweep, simulate

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def metadata_path(output_path: Path) -> Path:
    return output_path.with_suffix(".meta.json")


def _sibling(output_path: Path, name: str) -> Path:
    return output_path.with_suffix(f".{name}.csv")


def write_table(frame: pd.DataFrame, path: Path) -> Path:
    numeric = frame.select_dtypes(include="number")
    if not np.all(np.isfinite(numeric.to_numpy(dtype=float))):
        raise DomainError(f"Refusing to write non-finite values to {path}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise OSError(f"Cannot write {path}: {e}") from e
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def write_metadata(config: RunConfig, derived: Dict[str, Any], path: Path) -> Path:
    metadata = {
        "config": config.echo(),
        "derived": derived,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(metadata, indent=2, default=float) + "\n")
    except OSError as e:
        raise OSError(f"Cannot write {path}: {e}") from e
    return path


def _market_derived(config: RunConfig) -> Dict[str, Any]:
    market = config.market
    return {"V": market.total_vacancies, "alpha": market.job_offer_ratio}


def _macro_derived(config: RunConfig) -> Dict[str, Any]:
    u_star, pi_star = fixed_point(config.macro)
    return {"U_star": u_star, "pi_star": pi_star, "Js_star": config.macro.with_js_star().js,
            "Js": config.macro.js}


def _histogram_frame(histogram: Histogram) -> pd.DataFrame:
    return pd.DataFrame({"value": histogram.support, "mass": histogram.mass})


def run_simulate(config: RunConfig) -> List[Path]:
    output = Path(config.output_path)
    applications = HistogramAccumulator()
    sheets = HistogramAccumulator()

    def collect(state: MarketState, outcome: YearOutcome) -> None:
        applications.add(outcome.application_counts)
        sheets.add(state.sheet_counts)

    series = simulate(
        config.market,
        on_year=collect if config.histograms else None,
        progress=True,
    )
    frame = pd.DataFrame({"t": np.arange(series.horizon), "U_t": series.unemployment})
    written = [write_table(frame, output)]
    if config.histograms:
        written.append(write_table(_histogram_frame(applications.to_histogram()), _sibling(output, "applications")))
        written.append(write_table(_histogram_frame(sheets.to_histogram()), _sibling(output, "sheets")))
    burn_in = config.market.burn_in
    derived = {**_market_derived(config),
               "order_parameter": float(series.unemployment[burn_in:].mean())}
    written.append(write_metadata(config, derived, metadata_path(output)))
    return written


def _sweep_frame(result: SweepResult, column: str) -> pd.DataFrame:
    return pd.DataFrame({
        column: result.grid,
        "employment_mean": result.employment_mean,
        "employment_stderr": result.employment_stderr,
        "trials": np.full(len(result.grid), result.trials),
    })


def run_sweep(config: RunConfig) -> List[Path]:
    output = Path(config.output_path)
    grid = config.sweep.values()
    if config.mode == "beveridge":
        result = beveridge_sweep(config.market, grid, config.trials, workers=config.workers, progress=True)
        column = "alpha"
    else:
        result = gamma_sweep(config.market, grid, config.trials, workers=config.workers, progress=True)
        column = "gamma"
    derived = {**_market_derived(config), "requested_grid": grid.tolist()}
    return [
        write_table(_sweep_frame(result, column), output),
        write_metadata(config, derived, metadata_path(output)),
    ]


def _trajectory_frame(trajectory: MacroTrajectory) -> pd.DataFrame:
    return pd.DataFrame({"t": np.arange(len(trajectory)), "U": trajectory.U, "pi": trajectory.pi})


def run_neugart(config: RunConfig) -> List[Path]:
    output = Path(config.output_path)
    params = config.macro
    run = config.macro_run
    state = run.initial or default_initial_state(params)
    clamps = 0
    if run.burn_in:
        warmup = run_macro(params, state, run.burn_in)
        state, clamps = warmup.final, warmup.clamp_events
    trajectory = run_macro(params, state, run.horizon)
    derived = {**_macro_derived(config), "clamp_events": clamps + trajectory.clamp_events}
    return [
        write_table(_trajectory_frame(trajectory), output),
        write_metadata(config, derived, metadata_path(output)),
    ]


def run_coupled(config: RunConfig) -> List[Path]:
    output = Path(config.output_path)
    trajectory = coupled_run(config.market, config.macro, lookahead=config.macro_run.lookahead, progress=True)
    derived = {**_market_derived(config), **_macro_derived(config)}
    return [
        write_table(_trajectory_frame(trajectory), output),
        write_metadata(config, derived, metadata_path(output)),
    ]


def run_fit(config: RunConfig) -> List[Path]:
    output = Path(config.output_path)
    spec = config.fit
    if not spec.input_path:
        raise ConfigError("fit.input", "missing; give it in the config or on the command line")
    try:
        points = load_curve_points(spec.input_path)
    except (OSError, csv.Error, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise OSError(f"Cannot read {spec.input_path}: {e}") from e
    result = fit_offset_power_law(points, spec.b_range, spec.grid_cells)
    logger.info(f"pi + {result.b:.6g} ~ U^(-{result.c:.6g}) over {result.n} points")
    frame = pd.DataFrame([{"b": result.b, "c": result.c, "logC": result.log_c,
                           "sse": result.sse, "n": result.n}])
    derived = {"dropped_points": result.dropped}
    return [
        write_table(frame, output),
        write_metadata(config, derived, metadata_path(output)),
    ]


RUNNERS = {
    "simulate": run_simulate,
    "beveridge": run_sweep,
    "gamma-sweep": run_sweep,
    "neugart": run_neugart,
    "coupled": run_coupled,
    "fit": run_fit,
}


def execute(config: RunConfig) -> List[Path]:
    """
    Run the configured mode and write its artifacts.

    Returns:
        Paths of the written files, data table first
    """
    logger.info(f"Running {config.mode} (seed {config.seed}) -> {config.output_path}")
    return RUNNERS[config.mode](config)
