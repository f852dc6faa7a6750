"""Tests for configuration loading and the command-line entry point."""

import pytest

from src.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    build_parser,
    collect_overrides,
    main,
    run_command,
)
from src.config import dump_config, load_config, parse_assignment
from src.constants import ENV_OUTPUT_DIR, MANIFEST_FILE
from src.exceptions import ConfigurationError, ParameterError

FAST_SIM = ["--set", "sim.n_slots=500", "--set", "sim.window=100"]


def write_yaml(tmp_path, text: str):
    path = tmp_path / "config.yaml"
    path.write_text(text, encoding="utf-8")
    return path


def line_count(path) -> int:
    return len(path.read_text(encoding="utf-8").splitlines())


class TestLoadConfig:
    def test_preset_defaults(self):
        config = load_config()
        assert config.system.p_t == 2.0
        assert config.system.n_states == 50
        assert config.channel.n_gains == 5
        assert config.method == "vi"
        assert config.command is None

    def test_partial_file_merges_over_preset(self, tmp_path):
        config = load_config(write_yaml(tmp_path, "system:\n  p_t: 1.5\nsim:\n  seed: 9\n"))
        assert config.system.p_t == 1.5
        assert config.system.b_c == 9
        assert config.sim.seed == 9
        assert config.sim.n_slots == 10_000

    def test_exponent_without_dot_is_a_number(self, tmp_path):
        config = load_config(write_yaml(tmp_path, "system:\n  delta0_sq: 1e-10\n  h: 3e-5\n"))
        assert config.system.delta0_sq == 1e-10
        assert config.system.h == 3e-5

    def test_empty_file(self, tmp_path):
        assert load_config(write_yaml(tmp_path, "")).system.p_t == 2.0

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigurationError) as info:
            load_config(write_yaml(tmp_path, "system:\n  colour: red\n"))
        assert info.value.key == "system.colour"

    def test_unknown_section(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(write_yaml(tmp_path, "plotting:\n  dpi: 100\n"))

    def test_invalid_yaml(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(write_yaml(tmp_path, "system: [unclosed\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "absent.yaml")

    def test_parameter_invariant_names_key(self):
        with pytest.raises(ParameterError) as info:
            load_config(overrides={"system.k_cost": 9})
        assert info.value.key == "system.k_cost"

    def test_wrong_type(self):
        with pytest.raises(ConfigurationError) as info:
            load_config(overrides={"sim.n_slots": "many"})
        assert info.value.key == "sim.n_slots"

    def test_channel_must_match_gains(self):
        with pytest.raises(ConfigurationError) as info:
            load_config(overrides={"channel.matrix": [[0.5, 0.5], [0.5, 0.5]]})
        assert info.value.key == "channel.matrix"

    def test_non_stochastic_channel(self):
        matrix = [[0.5, 0.6, 0.0, 0.0, 0.0]] + [[0.2] * 5] * 4
        with pytest.raises(ConfigurationError):
            load_config(overrides={"channel.matrix": matrix})

    def test_discount_range(self):
        with pytest.raises(ConfigurationError) as info:
            load_config(overrides={"solver.gamma": 1.0})
        assert info.value.key == "solver.gamma"

    def test_system_discount_reaches_solver_and_agent(self):
        config = load_config(overrides={"system.gamma": 0.8})
        assert config.solver.gamma == 0.8
        assert config.ql.gamma == 0.8

    def test_explicit_discount_beats_system(self, tmp_path):
        config = load_config(write_yaml(tmp_path, "system:\n  gamma: 0.8\nsolver:\n  gamma: 0.7\n"))
        assert config.solver.gamma == 0.7
        assert config.ql.gamma == 0.8

    def test_inherited_discount_must_be_below_one(self):
        with pytest.raises(ConfigurationError) as info:
            load_config(overrides={"system.gamma": 1.0})
        assert info.value.key == "system.gamma"
        config = load_config(overrides={"system.gamma": 1.0, "solver.gamma": 0.9, "ql.gamma": 0.9})
        assert config.system.gamma == 1.0

    def test_unknown_preset(self):
        with pytest.raises(ConfigurationError):
            load_config(preset="no-such-preset")

    def test_manifest_round_trip(self, tmp_path):
        config = load_config(overrides={"system.p_t": 1.5, "ql.seed": 3, "run.method": "greedy"})
        path = tmp_path / MANIFEST_FILE
        path.write_text(dump_config(config.to_dict("simulate")), encoding="utf-8")
        again = load_config(path)
        assert again.system == config.system
        assert again.ql == config.ql
        assert again.method == "greedy"
        assert again.command == "simulate"
        assert again.to_dict() == config.to_dict("simulate")

    def test_stream_scheme_mismatch(self):
        with pytest.raises(ConfigurationError):
            load_config(overrides={"run.scheme_version": 99})


class TestOverrides:
    def test_parse_assignment(self):
        assert parse_assignment("sim.n_slots=500") == ("sim.n_slots", 500)
        assert parse_assignment("sweep.powers=[1, 2.5]") == ("sweep.powers", [1, 2.5])

    def test_malformed_assignment(self):
        with pytest.raises(ConfigurationError):
            parse_assignment("sim.n_slots")

    def test_named_flags(self):
        args = build_parser().parse_args(
            ["simulate", "--pt", "2.5", "--seed", "4", "--gamma", "0.8", "--method", "greedy", "-o", "out"]
        )
        overrides = collect_overrides(args)
        assert overrides["system.p_t"] == 2.5
        assert overrides["sim.seed"] == overrides["ql.seed"] == overrides["detector.seed"] == 4
        assert overrides["solver.gamma"] == overrides["ql.gamma"] == 0.8
        assert overrides["run.method"] == "greedy"
        assert overrides["output"] == "out"

    def test_named_flag_beats_set(self):
        args = build_parser().parse_args(["solve", "--set", "system.p_t=1.0", "--pt", "2.5"])
        assert collect_overrides(args)["system.p_t"] == 2.5

    def test_output_from_environment(self, monkeypatch):
        monkeypatch.setenv(ENV_OUTPUT_DIR, "env-results")
        assert collect_overrides(build_parser().parse_args(["solve"]))["output"] == "env-results"
        assert collect_overrides(build_parser().parse_args(["solve", "-o", "cli"]))["output"] == "cli"

    def test_run_command_needs_a_command(self):
        with pytest.raises(ConfigurationError):
            run_command(None, load_config())


class TestMain:
    def test_bad_key_exit_code(self, tmp_path):
        assert main(["solve", "-o", str(tmp_path), "--set", "system.colour=1"]) == EXIT_CONFIG

    def test_malformed_set_exit_code(self, tmp_path):
        assert main(["solve", "-o", str(tmp_path), "--set", "oops"]) == EXIT_CONFIG

    def test_invalid_parameter_exit_code(self, tmp_path):
        assert main(["solve", "-o", str(tmp_path), "--pt", "-1"]) == EXIT_CONFIG
        assert not (tmp_path / MANIFEST_FILE).exists()

    def test_solve(self, tmp_path):
        assert main(["solve", "-o", str(tmp_path), "--pt", "2"]) == EXIT_OK
        assert line_count(tmp_path / "policy.csv") == 51
        report = (tmp_path / "solver_report.csv").read_text(encoding="utf-8")
        assert "bellman_residual" in report
        assert "threshold_gain_0" in report
        assert (tmp_path / MANIFEST_FILE).exists()

    def test_simulate_is_reproducible(self, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "-o", str(first), "--method", "greedy", *FAST_SIM]) == EXIT_OK
        assert main(["simulate", "-o", str(second), "--method", "greedy", *FAST_SIM]) == EXIT_OK
        for name in ("trace.csv", "battery_hist.csv", "summary.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()
        assert line_count(first / "trace.csv") == 501

    def test_rerun_from_manifest(self, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "-o", str(first), *FAST_SIM]) == EXIT_OK
        assert main(["--config", str(first / MANIFEST_FILE), "-o", str(second)]) == EXIT_OK
        for name in ("trace.csv", "battery_hist.csv", "summary.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_train(self, tmp_path):
        assert main(["train", "-o", str(tmp_path), "--set", "ql.max_steps=2000", "--set", "sim.window=100"]) == EXIT_OK
        assert line_count(tmp_path / "qtable.csv") == 51
        assert line_count(tmp_path / "learning_curve.csv") > 1

    def test_detector_check(self, tmp_path):
        argv = ["detector-check", "-o", str(tmp_path), "--set", "detector.bits=1000",
                "--set", "detector.gain_values=[3.0e-5, 6.0e-5]"]
        assert main(argv) == EXIT_OK
        assert line_count(tmp_path / "detector.csv") == 3

    def test_battery_study(self, tmp_path):
        argv = ["battery-study", "-o", str(tmp_path), "--set", "battery_study.methods=[greedy, vi]", *FAST_SIM]
        assert main(argv) == EXIT_OK
        assert (tmp_path / "battery_hist_h2e-05.csv").exists()
        assert line_count(tmp_path / "battery_hist_h5e-05.csv") == 1 + 2 * 10

    def test_small_sweep(self, tmp_path):
        argv = ["sweep", "-o", str(tmp_path), "--set", "sweep.powers=[1.0, 2.0]",
                "--set", "sweep.methods=[vi, greedy]", *FAST_SIM]
        assert main(argv) == EXIT_OK
        assert line_count(tmp_path / "sweep.csv") == 5
        assert line_count(tmp_path / "sweep_analytic.csv") == 5

    @pytest.mark.slow
    def test_full_sweep(self, tmp_path):
        assert main(["sweep", "-o", str(tmp_path)]) == EXIT_OK
        assert line_count(tmp_path / "sweep.csv") == 13
        for p in ("1", "1.5", "2", "2.5"):
            assert (tmp_path / f"learning_curve_pt{p}.csv").exists()
