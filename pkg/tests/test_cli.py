"""End-to-end tests for the scenario command line."""

import json

import numpy as np
import pytest
import yaml

from ddmintime.cli import (
    EXIT_BAD_CONFIG,
    EXIT_DISAGREE,
    EXIT_INFEASIBLE,
    EXIT_IO,
    EXIT_OK,
    main,
)
from ddmintime.trajectories import read_trajectory_csv


def integrator_config(**problem_overrides) -> dict:
    problem = {
        "K_i": 1,
        "K_f": 1,
        "L": 6,
        "T0": 0,
        "T1": 10,
        "dt": 1.0,
        "u_init": [0.0],
        "y_init": [-5.0],
        "target": {"point": [0.0]},
        "path": {"input_box": 1.0},
        "x_target": [0.0],
    }
    problem.update(problem_overrides)
    return {
        "system": {
            "kind": "matrices",
            "matrices": {"A": [[1.0]], "B": [[1.0]], "C": [[1.0]], "D": [[0.0]]},
        },
        "data": {"seed": 11, "M": 60, "bound": 1.0},
        "problem": problem,
    }


@pytest.fixture
def write_config(tmp_path):
    def _write(cfg: dict, name: str = "scenario.yaml") -> str:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(cfg))
        return str(path)

    return _write


# ----- solve ---------------------------------------------------------------------


def test_solve_writes_outputs_and_summary(tmp_path, write_config, capsys):
    config = write_config(integrator_config())
    out = tmp_path / "out"
    assert main(["solve", "--config", config, "--out", str(out)]) == EXIT_OK
    assert "t* = 5" in capsys.readouterr().out

    summary = json.loads((out / "summary.json").read_text())
    assert summary["t_star"] == 5
    assert summary["time_of_flight_s"] == pytest.approx(5.0)
    assert summary["theta"] == 2.0
    assert summary["seed"] == 11
    assert summary["use_reduction"] is True
    assert summary["status"] == "optimal"
    assert summary["init_residual"] <= 1e-12
    assert summary["path_violation"] <= 1e-9
    assert summary["K"] == 3 and summary["N"] == 15
    assert summary["files"] == {"trajectory": "trajectory.csv", "slack": "slack.csv"}

    trajectory = read_trajectory_csv(out / "trajectory.csv")
    assert trajectory.start_index == -1
    assert trajectory.outputs[1, 0] == pytest.approx(-5.0)

    lines = (out / "slack.csv").read_text().strip().splitlines()
    assert lines[0] == "t,eps_l1"
    slack = {int(row.split(",")[0]): float(row.split(",")[1]) for row in lines[1:]}
    assert sorted(slack) == list(range(0, 11))
    assert all(slack[t] < 1e-3 for t in range(5, 11))
    assert slack[0] >= 1e-3


def test_solve_is_deterministic(tmp_path, write_config):
    config = write_config(integrator_config())
    for name in ("a", "b"):
        assert main(["solve", "--config", config, "--out", str(tmp_path / name)]) == EXIT_OK
    for file in ("trajectory.csv", "slack.csv"):
        assert (tmp_path / "a" / file).read_bytes() == (tmp_path / "b" / file).read_bytes()


def test_solve_reports_unsettled_horizons(tmp_path, write_config, capsys):
    config = write_config(integrator_config(T1=3))
    code = main(["solve", "--config", config, "--out", str(tmp_path / "out")])
    assert code == EXIT_INFEASIBLE
    assert "not settled" in capsys.readouterr().out
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["t_star"] is None
    assert summary["time_of_flight_s"] is None


def test_solve_theta_override_is_recorded(tmp_path, write_config):
    config = write_config(integrator_config())
    out = tmp_path / "out"
    assert main(["solve", "--config", config, "--out", str(out), "--theta", "4.0"]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["theta"] == 4.0
    assert summary["t_star"] == 5


def test_solve_without_reduction_matches(tmp_path, write_config):
    config = write_config(integrator_config())
    out = tmp_path / "out"
    code = main(["solve", "--config", config, "--out", str(out), "--no-reduction"])
    assert code == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["use_reduction"] is False
    assert summary["t_star"] == 5


def test_solve_can_dump_the_assembled_program(tmp_path, write_config):
    config = write_config(integrator_config())
    out = tmp_path / "out"
    assert main(["solve", "--config", config, "--out", str(out), "--dump-lp"]) == EXIT_OK
    dump = (out / "lp_dump.txt").read_text()
    assert dump.startswith("LP n=")
    assert "MINIMIZE" in dump and "BOUNDS" in dump


def test_solve_from_recorded_data(tmp_path, write_config):
    # record the experiment first, then solve against the CSV alone
    config = write_config(integrator_config())
    data_dir = tmp_path / "data"
    assert main(["generate-data", "--config", config, "--out", str(data_dir)]) == EXIT_OK

    cfg = integrator_config()
    cfg["system"] = {"kind": "data_csv", "data_csv": str(data_dir / "data.csv")}
    del cfg["data"]
    csv_config = write_config(cfg, "from_csv.yaml")
    out = tmp_path / "out"
    assert main(["solve", "--config", csv_config, "--out", str(out)]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["t_star"] == 5
    assert summary["seed"] is None


# ----- baseline and compare ---------------------------------------------------------


def test_baseline_matches_the_known_answer(tmp_path, write_config, capsys):
    config = write_config(integrator_config())
    out = tmp_path / "out"
    assert main(["baseline", "--config", config, "--out", str(out)]) == EXIT_OK
    assert "baseline t* = 5" in capsys.readouterr().out
    summary = json.loads((out / "baseline_summary.json").read_text())
    assert summary["t_star"] == 5
    assert summary["time_of_flight_s"] == pytest.approx(5.0)
    assert summary["x_init"] == [-5.0]
    witness = read_trajectory_csv(out / "baseline_trajectory.csv")
    assert witness.length == 6


def test_baseline_uses_the_declared_initial_state(tmp_path, write_config):
    config = write_config(integrator_config(x_init=[-3.0]))
    out = tmp_path / "out"
    assert main(["baseline", "--config", config, "--out", str(out)]) == EXIT_OK
    summary = json.loads((out / "baseline_summary.json").read_text())
    assert summary["x_init"] == [-3.0]
    assert summary["t_star"] == 3


def test_compare_agrees_on_the_integrator(tmp_path, write_config, capsys):
    config = write_config(integrator_config())
    out = tmp_path / "out"
    assert main(["compare", "--config", config, "--out", str(out)]) == EXIT_OK
    assert "agree" in capsys.readouterr().out
    report = json.loads((out / "compare_report.json").read_text())
    assert report["lp_t_star"] == 5
    assert report["baseline_t_star"] == 5
    assert report["agree"] is True
    assert (out / "trajectory.csv").exists()
    assert (out / "baseline_trajectory.csv").exists()


def test_compare_flags_disagreement(tmp_path, write_config, capsys):
    # aiming the state scan at a different point than the output target
    config = write_config(integrator_config(x_target=[1.0]))
    out = tmp_path / "out"
    code = main(["compare", "--config", config, "--out", str(out)])
    assert code == EXIT_DISAGREE
    assert "DISAGREE" in capsys.readouterr().out
    report = json.loads((out / "compare_report.json").read_text())
    assert report["agree"] is False
    assert report["lp_t_star"] == 5
    assert report["baseline_t_star"] == 6


# ----- data generation ----------------------------------------------------------------


def test_generate_data_round_trips_and_checks_excitation(tmp_path, write_config, capsys):
    config = write_config(integrator_config())
    out = tmp_path / "out"
    assert main(["generate-data", "--config", config, "--out", str(out)]) == EXIT_OK
    stdout = capsys.readouterr().out
    assert "persistently exciting of order 7: True" in stdout
    lines = (out / "data.csv").read_text().strip().splitlines()
    assert lines[0] == "t,u_1,y_1"
    assert len(lines) == 61


def test_generate_data_is_deterministic_and_seed_sensitive(tmp_path, write_config):
    config = write_config(integrator_config())
    for name, seed_args in (("a", []), ("b", []), ("c", ["--seed", "12"])):
        code = main(["generate-data", "--config", config, "--out", str(tmp_path / name), *seed_args])
        assert code == EXIT_OK
    a = (tmp_path / "a" / "data.csv").read_bytes()
    assert a == (tmp_path / "b" / "data.csv").read_bytes()
    assert a != (tmp_path / "c" / "data.csv").read_bytes()


def test_generate_data_flags_insufficient_excitation(tmp_path, write_config, capsys):
    cfg = integrator_config(L=30)
    cfg["data"]["M"] = 40  # far too short for order 31
    config = write_config(cfg)
    code = main(["generate-data", "--config", config, "--out", str(tmp_path / "out")])
    assert code == EXIT_INFEASIBLE
    assert "collect more samples" in capsys.readouterr().out


# ----- lag -------------------------------------------------------------------------


def test_lag_reports_json(tmp_path, write_config, capsys):
    config = write_config(integrator_config())
    assert main(["lag", "--config", config]) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == {"lag": 1}


# ----- failure modes ------------------------------------------------------------------


def test_missing_config_file_is_a_config_error(tmp_path, capsys):
    code = main(["solve", "--config", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)])
    assert code == EXIT_BAD_CONFIG
    assert "cannot read scenario file" in capsys.readouterr().err


def test_missing_section_is_a_config_error(tmp_path, write_config, capsys):
    cfg = integrator_config()
    del cfg["problem"]
    code = main(["solve", "--config", write_config(cfg), "--out", str(tmp_path / "out")])
    assert code == EXIT_BAD_CONFIG
    assert "missing the 'problem' section" in capsys.readouterr().err


def test_unknown_system_kind_is_a_config_error(tmp_path, write_config, capsys):
    cfg = integrator_config()
    cfg["system"] = {"kind": "mystery"}
    code = main(["solve", "--config", write_config(cfg), "--out", str(tmp_path / "out")])
    assert code == EXIT_BAD_CONFIG
    assert "unknown system.kind" in capsys.readouterr().err


def test_wrong_target_width_is_a_config_error(tmp_path, write_config, capsys):
    cfg = integrator_config(target={"point": [0.0, 0.0, 0.0]})
    code = main(["solve", "--config", write_config(cfg), "--out", str(tmp_path / "out")])
    assert code == EXIT_BAD_CONFIG
    assert "target point" in capsys.readouterr().err


def test_baseline_without_input_box_is_a_config_error(tmp_path, write_config, capsys):
    cfg = integrator_config(path={"S_u": [[1.0]], "S_y": [[0.0]], "s": [1.0]})
    code = main(["baseline", "--config", write_config(cfg), "--out", str(tmp_path / "out")])
    assert code == EXIT_BAD_CONFIG
    assert "input_box" in capsys.readouterr().err


def test_unwritable_output_directory_is_an_io_error(tmp_path, write_config, capsys):
    config = write_config(integrator_config())
    blocker = tmp_path / "blocker"
    blocker.write_text("a file, not a directory")
    code = main(["solve", "--config", config, "--out", str(blocker / "out")])
    assert code == EXIT_IO
    assert "error" in capsys.readouterr().err


# ----- the shipped scenario --------------------------------------------------------


def test_shipped_integrator_scenario_settles_in_five_steps(tmp_path, capsys):
    from pathlib import Path

    scenario = Path(__file__).resolve().parent.parent / "scenarios" / "integrator.yaml"
    out = tmp_path / "out"
    assert main(["compare", "--config", str(scenario), "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "compare_report.json").read_text())
    assert report["lp_t_star"] == 5
    assert report["baseline_t_star"] == 5
