"""
Run configuration.

A run is described by a TOML document with a few top-level keys and one
section per component:

    mode = "gamma-sweep"
    seed = 7
    trials = 5
    output = "out/gamma.csv"

    [market]
    companies = 50
    students = 500
    quota = 100
    applications = 10
    beta = 1.0

    [sweep]
    start = 1
    stop = 100
    count = 12
    scale = "log"

Missing values fall back to the defaults of the mode. Process-level settings
(worker count, log level) come from the environment, optionally through a
.env file.
"""

import logging
import os
import tomllib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from dotenv import load_dotenv

from .errors import ConfigError, DomainError
from .market import MarketParams
from .neugart import MacroState, NeugartParams

logger = logging.getLogger(__name__)

MODES = ("simulate", "beveridge", "gamma-sweep", "neugart", "coupled", "fit")

MARKET_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "simulate": dict(companies=1000, students=10000, quota=30, applications=10.0,
                     gamma=1.0, beta=1.0, horizon=10000, burn_in=0),
    "beveridge": dict(companies=50, students=500, quota=10, applications=1.0,
                      gamma=1.0, beta=1.0, horizon=2000, burn_in=0),
    "gamma-sweep": dict(companies=50, students=500, quota=10, applications=1.0,
                        gamma=1.0, beta=1.0, horizon=2000, burn_in=0),
    "coupled": dict(companies=50, students=500, quota=10, applications=10.0,
                    gamma=1.0, beta=10.0, horizon=10000, burn_in=0),
}

SWEEP_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "beveridge": dict(start=0.5, stop=10.0, count=20, scale="linear"),
    "gamma-sweep": dict(start=1.0, stop=100.0, count=12, scale="log"),
}

MACRO_KEYS = ("xi", "d", "c1", "c2", "mu", "vacancy_response", "delta", "m", "job_openings")
MACRO_RUN_DEFAULTS = dict(horizon=100000, burn_in=1000)

TOP_LEVEL_KEYS = {"mode", "seed", "output", "trials", "workers", "histograms",
                  "market", "macro", "sweep", "fit"}
SECTION_KEYS = {
    "market": {"companies", "students", "quota", "quotas", "applications", "gamma",
               "beta", "beta_history", "horizon", "burn_in"},
    "macro": set(MACRO_KEYS) | {"horizon", "burn_in", "initial_U", "initial_pi", "initial_pi_e", "lookahead"},
    "sweep": {"start", "stop", "count", "scale"},
    "fit": {"input", "b_min", "b_max", "grid_cells"},
}
MODE_SECTIONS = {
    "simulate": {"market"},
    "beveridge": {"market", "sweep"},
    "gamma-sweep": {"market", "sweep"},
    "neugart": {"macro"},
    "coupled": {"market", "macro"},
    "fit": {"fit"},
}


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class MacroRun:
    horizon: int = MACRO_RUN_DEFAULTS["horizon"]
    burn_in: int = MACRO_RUN_DEFAULTS["burn_in"]
    initial: Optional[MacroState] = None
    lookahead: bool = True


@dataclass(frozen=True)
class FitSpec:
    input_path: Optional[str] = None
    b_range: Optional[Tuple[float, float]] = None
    grid_cells: int = 200


@dataclass(frozen=True)
class RunConfig:
    mode: str
    seed: int = 0
    output_path: str = "run.csv"
    trials: int = 5
    workers: int = 1
    histograms: bool = False
    market: Optional[MarketParams] = None
    macro: Optional[NeugartParams] = None
    macro_run: Optional[MacroRun] = None
    sweep: Optional[GridSpec] = None
    fit: Optional[FitSpec] = None
    source: Dict[str, Any] = field(default_factory=dict, compare=False)

    @classmethod
    def from_file(cls, path: Union[str, Path], mode: Optional[str] = None) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError("config", f"cannot read {path}: {e}") from e
        return parse_config(text, mode=mode)

    def echo(self) -> Dict[str, Any]:
        """Fully resolved configuration for run metadata."""
        echo: Dict[str, Any] = {
            "mode": self.mode, "seed": self.seed, "output": self.output_path,
            "trials": self.trials, "workers": self.workers,
        }
        if self.mode == "simulate":
            echo["histograms"] = self.histograms
        if self.market is not None:
            echo["market"] = self.market.as_dict()
        if self.macro is not None:
            echo["macro"] = self.macro.as_dict()
        if self.macro_run is not None:
            echo["macro_run"] = {"horizon": self.macro_run.horizon, "burn_in": self.macro_run.burn_in,
                                 "lookahead": self.macro_run.lookahead}
            if self.macro_run.initial is not None:
                initial = self.macro_run.initial
                echo["macro_run"]["initial"] = {"U": initial.U, "pi": initial.pi, "pi_e": initial.pi_e}
        if self.sweep is not None:
            echo["sweep"] = vars(self.sweep).copy()
        if self.fit is not None:
            echo["fit"] = {"input": self.fit.input_path,
                           "b_range": list(self.fit.b_range) if self.fit.b_range else None,
                           "grid_cells": self.fit.grid_cells}
        return echo


def _number(key: str, value: Any, minimum: Optional[float] = None, integer: bool = False,
            strict: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if integer and not float(value).is_integer():
        raise ConfigError(key, f"expected an integer, got {value!r}")
    if minimum is not None:
        if strict and not value > minimum:
            raise ConfigError(key, f"must be > {minimum}, got {value}")
        if not strict and value < minimum:
            raise ConfigError(key, f"must be >= {minimum}, got {value}")
    return int(value) if integer else float(value)


def _section(doc: Dict[str, Any], name: str) -> Dict[str, Any]:
    section = doc.get(name, {})
    if not isinstance(section, dict):
        raise ConfigError(name, "expected a section")
    for key in section:
        if key not in SECTION_KEYS[name]:
            raise ConfigError(f"{name}.{key}", "unknown key")
    return section


def _market(section: Dict[str, Any], mode: str, seed: int) -> MarketParams:
    values = {**MARKET_DEFAULTS[mode], **section}
    companies = _number("market.companies", values["companies"], 1, integer=True)
    students = _number("market.students", values["students"], 1, integer=True)
    if "quotas" in section:
        if "quota" in section:
            raise ConfigError("market.quotas", "give either quota or quotas, not both")
        if not isinstance(section["quotas"], list):
            raise ConfigError("market.quotas", "expected a list of integers")
        quotas = tuple(_number(f"market.quotas[{i}]", q, 1, integer=True)
                       for i, q in enumerate(section["quotas"]))
        if len(quotas) != companies:
            raise ConfigError("market.quotas", f"expected {companies} entries, got {len(quotas)}")
    else:
        quotas = (_number("market.quota", values["quota"], 1, integer=True),) * companies
    if "beta_history" in section:
        if "beta" in section:
            raise ConfigError("market.beta_history", "give either beta or beta_history, not both")
        if not isinstance(section["beta_history"], list) or not section["beta_history"]:
            raise ConfigError("market.beta_history", "expected a non-empty list of numbers")
        beta_history = tuple(_number(f"market.beta_history[{i}]", b)
                             for i, b in enumerate(section["beta_history"]))
    else:
        beta_history = (_number("market.beta", values["beta"]),)
    horizon = _number("market.horizon", values["horizon"], 1, integer=True)
    burn_in = _number("market.burn_in", values["burn_in"], 0, integer=True)
    if burn_in >= horizon:
        raise ConfigError("market.burn_in", f"must be smaller than horizon {horizon}")
    try:
        return MarketParams(
            n_companies=companies,
            n_students=students,
            quotas=quotas,
            mean_applications=_number("market.applications", values["applications"], 0, strict=True),
            gamma=_number("market.gamma", values["gamma"], 0),
            beta_history=beta_history,
            horizon=horizon,
            burn_in=burn_in,
            seed=seed,
        )
    except DomainError as e:
        raise ConfigError("market", str(e)) from e


def _macro(section: Dict[str, Any]) -> Tuple[NeugartParams, MacroRun]:
    values = {}
    for key in MACRO_KEYS:
        if key in section:
            values[key] = _number(f"macro.{key}", section[key])
    try:
        params = NeugartParams(**values)
    except DomainError as e:
        raise ConfigError("macro", str(e)) from e
    horizon = _number("macro.horizon", section.get("horizon", MACRO_RUN_DEFAULTS["horizon"]), 1, integer=True)
    burn_in = _number("macro.burn_in", section.get("burn_in", MACRO_RUN_DEFAULTS["burn_in"]), 0, integer=True)
    initial = None
    if "initial_U" in section or "initial_pi" in section or "initial_pi_e" in section:
        if "initial_U" not in section:
            raise ConfigError("macro.initial_U", "required when an initial state is given")
        U = _number("macro.initial_U", section["initial_U"], 0)
        if U > 1:
            raise ConfigError("macro.initial_U", f"must be <= 1, got {U}")
        pi = _number("macro.initial_pi", section.get("initial_pi", 0.0))
        initial = MacroState(U=U, pi=pi, pi_e=_number("macro.initial_pi_e", section.get("initial_pi_e", pi)))
    lookahead = section.get("lookahead", True)
    if not isinstance(lookahead, bool):
        raise ConfigError("macro.lookahead", "expected true or false")
    return params, MacroRun(horizon=horizon, burn_in=burn_in, initial=initial, lookahead=lookahead)


def _grid(section: Dict[str, Any], mode: str) -> GridSpec:
    values = {**SWEEP_DEFAULTS[mode], **section}
    scale = values["scale"]
    if scale not in ("linear", "log"):
        raise ConfigError("sweep.scale", f"expected 'linear' or 'log', got {scale!r}")
    start = _number("sweep.start", values["start"], 0)
    stop = _number("sweep.stop", values["stop"], 0)
    count = _number("sweep.count", values["count"], 1, integer=True)
    if scale == "log" and start <= 0:
        raise ConfigError("sweep.start", "must be positive on a log scale")
    return GridSpec(start=start, stop=stop, count=count, scale=scale)


def _fit(section: Dict[str, Any]) -> FitSpec:
    b_range = None
    if "b_min" in section or "b_max" in section:
        if not ("b_min" in section and "b_max" in section):
            raise ConfigError("fit", "b_min and b_max must be given together")
        b_range = (_number("fit.b_min", section["b_min"]), _number("fit.b_max", section["b_max"]))
        if b_range[0] >= b_range[1]:
            raise ConfigError("fit.b_max", "must exceed b_min")
    input_path = section.get("input")
    if input_path is not None and not isinstance(input_path, str):
        raise ConfigError("fit.input", "expected a path")
    return FitSpec(input_path=input_path, b_range=b_range,
                   grid_cells=_number("fit.grid_cells", section.get("grid_cells", 200), 2, integer=True))


def default_workers() -> int:
    """Worker-pool size from LABOR_MARKET_WORKERS, default 1."""
    load_dotenv()
    raw = os.getenv("LABOR_MARKET_WORKERS", "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ConfigError("LABOR_MARKET_WORKERS", f"expected an integer, got {raw!r}")
    if workers < 1:
        raise ConfigError("LABOR_MARKET_WORKERS", f"must be >= 1, got {workers}")
    return workers


def parse_config(text: str, mode: Optional[str] = None) -> RunConfig:
    """
    Parse and validate a TOML run configuration.

    Args:
        text: TOML document
        mode: mode selected on the command line; must agree with the document

    Raises:
        ConfigError: naming the offending key path
    """
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError("", f"invalid TOML: {e}") from e

    for key in doc:
        if key not in TOP_LEVEL_KEYS:
            raise ConfigError(key, "unknown key")

    doc_mode = doc.get("mode")
    if mode and doc_mode and mode != doc_mode:
        raise ConfigError("mode", f"config says {doc_mode!r} but {mode!r} was requested")
    mode = mode or doc_mode
    if mode is None:
        raise ConfigError("mode", "missing")
    if mode not in MODES:
        raise ConfigError("mode", f"expected one of {', '.join(MODES)}, got {mode!r}")

    for name in SECTION_KEYS:
        if name in doc and name not in MODE_SECTIONS[mode]:
            raise ConfigError(name, f"section not used by mode {mode!r}")

    seed = _number("seed", doc.get("seed", 0), 0, integer=True)
    if seed >= 2 ** 64:
        raise ConfigError("seed", "must fit in 64 bits")
    trials = _number("trials", doc.get("trials", 5), 1, integer=True)
    workers = _number("workers", doc["workers"], 1, integer=True) if "workers" in doc else default_workers()
    output = doc.get("output", f"{mode}.csv")
    if not isinstance(output, str) or not output:
        raise ConfigError("output", "expected a path")
    histograms = doc.get("histograms", False)
    if not isinstance(histograms, bool):
        raise ConfigError("histograms", "expected true or false")
    if histograms and mode != "simulate":
        raise ConfigError("histograms", "only available in simulate mode")

    config = RunConfig(mode=mode, seed=seed, output_path=output, trials=trials,
                       workers=workers, histograms=histograms, source=doc)
    sections = MODE_SECTIONS[mode]
    if "market" in sections:
        config = replace(config, market=_market(_section(doc, "market"), mode, seed))
    if "macro" in sections:
        macro, macro_run = _macro(_section(doc, "macro"))
        config = replace(config, macro=macro, macro_run=macro_run)
    if "sweep" in sections:
        config = replace(config, sweep=_grid(_section(doc, "sweep"), mode))
    if "fit" in sections:
        config = replace(config, fit=_fit(_section(doc, "fit")))
    logger.debug(f"Parsed {mode} config: {config.echo()}")
    return config


def parse_grid(text: str) -> GridSpec:
    """Parse a start:stop:count[:log] grid override."""
    parts = text.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] not in ("log", "linear")):
        raise ConfigError("--grid", f"expected start:stop:count[:log], got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError("--grid", f"expected start:stop:count[:log], got {text!r}")
    scale = parts[3] if len(parts) == 4 else "linear"
    return _grid({"start": start, "stop": stop, "count": count, "scale": scale}, "beveridge")


def parse_range(text: str) -> Tuple[float, float]:
    """Parse a lo:hi range override."""
    try:
        lo, hi = (float(part) for part in text.split(":"))
    except ValueError:
        raise ConfigError("--b-range", f"expected lo:hi, got {text!r}")
    if lo >= hi:
        raise ConfigError("--b-range", f"lo must be below hi, got {text!r}")
    return lo, hi


def apply_overrides(
    config: RunConfig,
    seed: Optional[int] = None,
    output_path: Optional[str] = None,
    trials: Optional[int] = None,
    workers: Optional[int] = None,
    grid: Optional[GridSpec] = None,
    b_range: Optional[Tuple[float, float]] = None,
    input_path: Optional[str] = None,
) -> RunConfig:
    """Command-line flags take precedence over the config document."""
    if seed is not None:
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("--seed", f"must be an unsigned 64-bit integer, got {seed}")
        config = replace(config, seed=seed)
        if config.market is not None:
            config = replace(config, market=config.market.replace(seed=seed))
    if output_path is not None:
        config = replace(config, output_path=output_path)
    if trials is not None:
        if trials < 1:
            raise ConfigError("--trials", f"must be >= 1, got {trials}")
        config = replace(config, trials=trials)
    if workers is not None:
        if workers < 1:
            raise ConfigError("--workers", f"must be >= 1, got {workers}")
        config = replace(config, workers=workers)
    if grid is not None:
        if config.sweep is None:
            raise ConfigError("--grid", f"mode {config.mode!r} has no sweep grid")
        config = replace(config, sweep=grid)
    if b_range is not None or input_path is not None:
        if config.fit is None:
            raise ConfigError("--b-range" if b_range else "input", f"mode {config.mode!r} does not fit curves")
        fit = config.fit
        if b_range is not None:
            fit = replace(fit, b_range=b_range)
        if input_path is not None:
            fit = replace(fit, input_path=input_path)
        config = replace(config, fit=fit)
    return config
