import json

import numpy as np
import pandas as pd
import pytest

from labor_market_sim import __version__
from labor_market_sim.src.config import apply_overrides, parse_config
from labor_market_sim.src.errors import ConfigError
from labor_market_sim.src.philips_fit import load_curve_points
from labor_market_sim.src.runner import execute, metadata_path

SMALL_MARKET = "[market]\ncompanies = 10\nstudents = 50\nquota = 5\napplications = 2\nhorizon = 30\n"


@pytest.fixture(autouse=True)
def no_worker_env(monkeypatch):
    monkeypatch.delenv("LABOR_MARKET_WORKERS", raising=False)


def run(text: str, mode: str, output):
    config = apply_overrides(parse_config(text, mode=mode), output_path=str(output))
    return execute(config)


def read_meta(path):
    return json.loads(metadata_path(path).read_text())


def test_simulate_writes_series_histograms_and_metadata(tmp_path):
    out = tmp_path / "sim.csv"
    written = run("seed = 5\nhistograms = true\n" + SMALL_MARKET, "simulate", out)
    assert written[0] == out
    assert written[-1] == tmp_path / "sim.meta.json"

    frame = pd.read_csv(out)
    assert list(frame.columns) == ["t", "U_t"]
    assert frame["t"].tolist() == list(range(30))
    assert frame["U_t"].between(0, 1).all()

    for name in ("applications", "sheets"):
        histogram = pd.read_csv(tmp_path / f"sim.{name}.csv")
        assert list(histogram.columns) == ["value", "mass"]
        assert histogram["mass"].sum() == pytest.approx(1.0)

    meta = read_meta(out)
    assert meta["version"] == __version__
    assert meta["config"]["market"]["n_companies"] == 10
    assert meta["derived"]["V"] == 50
    assert meta["derived"]["alpha"] == pytest.approx(1.0)
    assert meta["derived"]["order_parameter"] == pytest.approx(frame["U_t"].mean())
    assert "timestamp" in meta


def test_rerun_reproduces_data_table(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    run("seed = 5\n" + SMALL_MARKET, "simulate", first)
    run("seed = 5\n" + SMALL_MARKET, "simulate", second)
    assert first.read_bytes() == second.read_bytes()


def test_sweep_schema_and_worker_independence(tmp_path):
    text = "seed = 2\ntrials = 2\n" + SMALL_MARKET + "[sweep]\nstart = 0.5\nstop = 2\ncount = 3\n"
    serial, parallel = tmp_path / "serial.csv", tmp_path / "parallel.csv"
    run(text, "beveridge", serial)
    execute(apply_overrides(parse_config(text, mode="beveridge"), output_path=str(parallel), workers=2))

    frame = pd.read_csv(serial)
    assert list(frame.columns) == ["alpha", "employment_mean", "employment_stderr", "trials"]
    assert len(frame) == 3
    assert frame["trials"].tolist() == [2, 2, 2]
    assert frame["alpha"].tolist() == pytest.approx([0.4, 1.2, 2.0])
    assert serial.read_bytes() == parallel.read_bytes()
    assert read_meta(serial)["derived"]["requested_grid"] == pytest.approx([0.5, 1.25, 2.0])


def test_gamma_sweep_schema(tmp_path):
    out = tmp_path / "gamma.csv"
    run("trials = 1\n" + SMALL_MARKET + "[sweep]\nstart = 1\nstop = 10\ncount = 2\n", "gamma-sweep", out)
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["gamma", "employment_mean", "employment_stderr", "trials"]
    assert frame["gamma"].tolist() == pytest.approx([1.0, 10.0])


def test_neugart_schema_and_derived_values(tmp_path):
    out = tmp_path / "macro.csv"
    run("[macro]\nhorizon = 100\nburn_in = 10\n", "neugart", out)
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["t", "U", "pi"]
    assert len(frame) == 100
    assert np.isfinite(frame.to_numpy()).all()
    derived = read_meta(out)["derived"]
    assert derived["U_star"] == pytest.approx(0.0224)
    assert derived["pi_star"] == pytest.approx(0.03)
    assert derived["Js_star"] == pytest.approx(0.25277, abs=1e-5)
    assert derived["clamp_events"] >= 0


def test_coupled_schema_feeds_fit(tmp_path):
    out = tmp_path / "coupled.csv"
    market = "[market]\ncompanies = 20\nstudents = 200\nquota = 10\napplications = 10\nbeta = 10\nhorizon = 40\n"
    run("seed = 8\n" + market, "coupled", out)
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["t", "U", "pi"]
    assert len(frame) == 40
    assert frame["pi"].iloc[0] == pytest.approx(0.03)
    derived = read_meta(out)["derived"]
    assert derived["Js_star"] == pytest.approx(0.25277, abs=1e-5)
    assert (derived["U_star"], derived["pi_star"]) == pytest.approx((0.0224, 0.03))
    assert derived["alpha"] == pytest.approx(1.0)

    points = load_curve_points(out)
    assert len(points) + points.dropped == 40


def test_fit_writes_one_row(tmp_path):
    U = np.logspace(-2, 0, 30)
    source = tmp_path / "points.csv"
    pd.DataFrame({"U": U, "pi": U ** -0.5 - 1.0}).to_csv(source, index=False)
    out = tmp_path / "fit.csv"
    run(f'[fit]\ninput = "{source}"\n', "fit", out)
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["b", "c", "logC", "sse", "n"]
    assert len(frame) == 1
    assert frame["b"][0] == pytest.approx(1.0, rel=1e-6)
    assert frame["c"][0] == pytest.approx(0.5, rel=1e-6)
    assert frame["n"][0] == 30


def test_fit_without_input(tmp_path):
    with pytest.raises(ConfigError):
        run("", "fit", tmp_path / "fit.csv")


def test_fit_unreadable_input(tmp_path):
    with pytest.raises(OSError):
        run(f'[fit]\ninput = "{tmp_path / "missing.csv"}"\n', "fit", tmp_path / "fit.csv")
