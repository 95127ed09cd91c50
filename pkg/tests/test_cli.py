import json

import numpy as np
import pandas as pd
import pytest

from labor_market_sim.cli import EXIT_CONFIG_ERROR, EXIT_OK, EXIT_RUNTIME_ERROR, build_parser, main


@pytest.fixture(autouse=True)
def no_worker_env(monkeypatch):
    monkeypatch.delenv("LABOR_MARKET_WORKERS", raising=False)


def test_parser_knows_every_mode():
    parser = build_parser()
    args = parser.parse_args(["gamma-sweep", "--grid", "1:100:12:log", "--trials", "3", "--seed", "7"])
    assert (args.command, args.grid, args.trials, args.seed) == ("gamma-sweep", "1:100:12:log", 3, 7)
    args = parser.parse_args(["fit", "points.csv", "--b-range", "0.5:2"])
    assert (args.input, args.b_range) == ("points.csv", "0.5:2")
    with pytest.raises(SystemExit):
        parser.parse_args(["replay"])


def test_neugart_run_succeeds(tmp_path):
    config = tmp_path / "macro.toml"
    config.write_text('mode = "neugart"\n[macro]\nhorizon = 20\nburn_in = 5\n')
    out = tmp_path / "macro.csv"
    assert main(["neugart", "--config", str(config), "--out", str(out), "--seed", "3"]) == EXIT_OK
    assert len(pd.read_csv(out)) == 20
    meta = json.loads((tmp_path / "macro.meta.json").read_text())
    assert meta["config"]["seed"] == 3


def test_fit_with_command_line_input(tmp_path):
    U = np.logspace(-2, 0, 20)
    source = tmp_path / "points.csv"
    pd.DataFrame({"U": U, "pi": 2.0 * U ** -0.3 - 1.5}).to_csv(source, index=False)
    out = tmp_path / "fit.csv"
    assert main(["fit", str(source), "--out", str(out), "--b-range", "0.6:5"]) == EXIT_OK
    row = pd.read_csv(out).iloc[0]
    assert row["b"] == pytest.approx(1.5, rel=1e-6)
    assert row["c"] == pytest.approx(0.3, rel=1e-6)


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--trials", "0"],
        ["beveridge", "--grid", "1:2"],
        ["fit", "--b-range", "3:1"],
        ["neugart", "--config", "/nonexistent/run.toml"],
    ],
)
def test_config_errors_exit_2(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path / "x.csv")]) == EXIT_CONFIG_ERROR


def test_missing_fit_input_exits_2(tmp_path):
    assert main(["fit", "--out", str(tmp_path / "fit.csv")]) == EXIT_CONFIG_ERROR


def test_runtime_errors_exit_3(tmp_path):
    assert main(["fit", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "fit.csv")]) == EXIT_RUNTIME_ERROR

    flat = tmp_path / "flat.csv"
    flat.write_text("U,pi\n0.1,0.1\n0.1,0.2\n0.1,0.3\n")
    assert main(["fit", str(flat), "--out", str(tmp_path / "fit.csv")]) == EXIT_RUNTIME_ERROR
