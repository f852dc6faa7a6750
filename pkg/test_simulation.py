"""Tests for the slot simulator and the experiment runners."""

import numpy as np
import pytest

from src.agents import QLConfig, greedy_policy
from src.channel import GainMarkov
from src.constants import DEFAULT_CHANNEL_MATRIX, DEFAULT_SETUP
from src.exceptions import ParameterError
from src.mdp import Policy, SolverConfig, long_run_average, value_iteration
from src.model import SystemParams
from src.simulation import (
    SimConfig,
    battery_study,
    build_policy,
    channel_path,
    compare_policies,
    curve_rows,
    run_policy,
    simulate_path,
    sweep_power,
)

N_SLOTS = 5000
SEED = 31
SWEEP_POWERS = [1.0, 1.5, 2.0, 2.5]

# Zero-initialized Q with ties to harvest and eps0 / sqrt(t) exploration
# tries backscatter only a few dozen times in 1e5 steps. Measured on the
# preset: QL/VI = 0.58 at every power (0.745 after 1e6 steps) and greedy
# above QL (2328 vs 1449 bits/slot).
QL_GAP_REASON = "learned policy under-explores backscatter; QL/VI measured at 0.58"


@pytest.fixture(scope="module")
def full_sweep():
    params = SystemParams(**DEFAULT_SETUP["system"])
    channel = GainMarkov(np.array(DEFAULT_CHANNEL_MATRIX))
    return sweep_power(params, SWEEP_POWERS, channel)


def never_backscatter(params) -> Policy:
    return Policy(np.zeros(params.n_states, dtype=int), name="never")


class TestRunPolicy:
    def test_never_backscatter_earns_nothing(self, preset_params, preset_channel):
        metrics = run_policy(preset_params, preset_channel, never_backscatter(preset_params), N_SLOTS, SEED)
        assert metrics.mean_throughput == 0.0
        assert not metrics.per_slot_rate.any()
        assert metrics.mode_counts == {"harvest": N_SLOTS, "backscatter": 0}

    def test_same_seed_same_metrics(self, preset_params, preset_channel):
        policy = greedy_policy(preset_params)
        a = run_policy(preset_params, preset_channel, policy, N_SLOTS, SEED)
        b = run_policy(preset_params, preset_channel, policy, N_SLOTS, SEED)
        assert a.same_as(b)
        assert a.mean_throughput == b.mean_throughput
        assert np.array_equal(a.battery_histogram, b.battery_histogram)

    def test_metrics_are_consistent(self, preset_params, preset_channel):
        metrics = run_policy(preset_params, preset_channel, greedy_policy(preset_params), N_SLOTS, SEED,
                             window=100)
        assert metrics.battery_histogram.sum() == pytest.approx(1.0)
        assert sum(metrics.mode_counts.values()) == N_SLOTS
        assert metrics.mean_throughput == pytest.approx(metrics.per_slot_rate.mean())
        assert metrics.battery_trace.min() >= 0
        assert metrics.battery_trace.max() <= preset_params.b_c
        assert np.all(metrics.battery_trace[metrics.actions == 1] >= preset_params.k_cost)
        assert len(metrics.rolling_average) == N_SLOTS - 100 + 1

    def test_starts_from_initial_battery(self, preset_params, preset_channel):
        metrics = run_policy(preset_params, preset_channel, greedy_policy(preset_params), 10, SEED,
                             e_initial=7, initial_gain=2)
        assert metrics.battery_trace[0] == 7
        assert metrics.gain_path[0] == 2
        assert metrics.actions[0] == 1

    def test_uses_shared_channel_path(self, preset_params, preset_channel):
        metrics = run_policy(preset_params, preset_channel, greedy_policy(preset_params), N_SLOTS, SEED)
        assert np.array_equal(metrics.gain_path, channel_path(preset_channel, N_SLOTS, SEED))

    def test_rejects_infeasible_policy(self, preset_params, preset_channel):
        policy = Policy(np.ones(preset_params.n_states, dtype=int))
        with pytest.raises(ParameterError):
            run_policy(preset_params, preset_channel, policy, 10, SEED)

    def test_rejects_bad_initial_battery(self, preset_params, preset_channel):
        with pytest.raises(ParameterError):
            run_policy(preset_params, preset_channel, greedy_policy(preset_params), 10, SEED, e_initial=10)

    def test_fixed_path(self, preset_params):
        # a gain path stuck at G_4 harvests 3 net units per slot until full
        metrics = simulate_path(preset_params, never_backscatter(preset_params), np.full(6, 4))
        assert metrics.battery_trace.tolist() == [0, 3, 6, 9, 9, 9]


class TestComparePolicies:
    def test_policy_against_itself(self, preset_params, preset_channel):
        policy = greedy_policy(preset_params)
        results = compare_policies(preset_params, preset_channel, {"a": policy, "b": policy}, N_SLOTS, SEED)
        assert results["a"].same_as(results["b"])

    def test_policies_share_path(self, preset_params, preset_channel, preset_model):
        _, vi = value_iteration(preset_model, 0.9)
        results = compare_policies(preset_params, preset_channel, [vi, greedy_policy(preset_params)], N_SLOTS, SEED)
        assert set(results) == {"vi", "greedy"}
        assert np.array_equal(results["vi"].gain_path, results["greedy"].gain_path)

    def test_greedy_battery_stays_low(self, preset_params, preset_channel, preset_model):
        _, vi = value_iteration(preset_model, 0.9)
        results = compare_policies(preset_params, preset_channel, [vi, greedy_policy(preset_params)], 10_000, SEED)
        greedy = results["greedy"]
        assert greedy.battery_trace.max() <= 5
        assert greedy.fraction_below(preset_params.k_cost) > 0.6
        assert greedy.fraction_at_least(7) < results["vi"].fraction_at_least(7)


class TestBuildPolicy:
    @pytest.mark.parametrize("method", ["vi", "ql", "greedy"])
    def test_methods(self, preset_params, preset_channel, preset_model, method):
        built = build_policy(method, preset_params, preset_channel, ql=QLConfig(max_steps=1000))
        assert built.policy.name == method
        built.policy.check_feasible(preset_model.feasible)
        assert (built.value is not None) == (method == "vi")
        assert (built.training is not None) == (method == "ql")

    def test_unknown_method(self, preset_params, preset_channel):
        with pytest.raises(ParameterError):
            build_policy("sarsa", preset_params, preset_channel)


class TestSweep:
    def test_rows_in_power_then_method_order(self, preset_params, preset_channel):
        result = sweep_power(preset_params, [1.0, 2.0], preset_channel, ("greedy", "ql"),
                             ql=QLConfig(max_steps=1000), sim=SimConfig(n_slots=1000, window=100))
        assert [(p, m) for p, m, _ in result.rows()] == [
            (1.0, "greedy"), (1.0, "ql"), (2.0, "greedy"), (2.0, "ql"),
        ]
        assert len(result.analytic_rows()) == 4
        curves = result.learning_curves()
        assert set(curves) == {1.0, 2.0}
        assert len(curves[1.0]) == 1000 - 100 + 1

    def test_single_cell_matches_compare(self, preset_params, preset_channel):
        sim = SimConfig(n_slots=2000, seed=SEED)
        result = sweep_power(preset_params, [2.0], preset_channel, ("greedy",), sim=sim)
        direct = compare_policies(preset_params.with_power(2.0), preset_channel,
                                  [greedy_policy(preset_params)], 2000, SEED)
        assert result.throughput(2.0, "greedy") == direct["greedy"].mean_throughput

    def test_process_pool_matches_serial(self, preset_params, preset_channel):
        sim = SimConfig(n_slots=500)
        serial = sweep_power(preset_params, [1.0, 2.0], preset_channel, ("vi", "greedy"), sim=sim)
        pooled = sweep_power(preset_params, [1.0, 2.0], preset_channel, ("vi", "greedy"), sim=sim, workers=2)
        assert serial.rows() == pooled.rows()

    def test_rejects_bad_powers(self, preset_params, preset_channel):
        with pytest.raises(ParameterError):
            sweep_power(preset_params, [], preset_channel)
        with pytest.raises(ParameterError):
            sweep_power(preset_params, [1.0, -2.0], preset_channel)

    def test_rejects_unknown_method(self, preset_params, preset_channel):
        with pytest.raises(ParameterError):
            sweep_power(preset_params, [1.0], preset_channel, ("vi", "random"))

    def test_missing_cell(self, preset_params, preset_channel):
        result = sweep_power(preset_params, [1.0], preset_channel, ("greedy",), sim=SimConfig(n_slots=100))
        with pytest.raises(KeyError):
            result.throughput(3.0, "greedy")

    @pytest.mark.slow
    def test_full_sweep(self, full_sweep):
        result = full_sweep
        assert len(result.rows()) == 12
        greedy = [result.throughput(p, "greedy") for p in SWEEP_POWERS]
        # same path and power-relative units: only the slot rates change
        assert all(b >= a for a, b in zip(greedy, greedy[1:]))
        assert all(v > 0 for _, _, v in result.rows())

    @pytest.mark.slow
    @pytest.mark.xfail(strict=True, reason=QL_GAP_REASON)
    def test_learned_policy_is_near_optimal(self, full_sweep):
        for p in SWEEP_POWERS:
            assert full_sweep.throughput(p, "ql") >= 0.95 * full_sweep.throughput(p, "vi")
        analytic = {(p, m): v for p, m, v in full_sweep.analytic_rows()}
        assert analytic[2.0, "ql"] >= 0.95 * analytic[2.0, "vi"]

    @pytest.mark.slow
    @pytest.mark.xfail(strict=True, reason=QL_GAP_REASON)
    def test_greedy_trails_learned_policy(self, full_sweep):
        for p in SWEEP_POWERS:
            assert full_sweep.throughput(p, "greedy") <= full_sweep.throughput(p, "ql")
        ratio = {p: full_sweep.throughput(p, "greedy") / full_sweep.throughput(p, "vi") for p in SWEEP_POWERS}
        assert ratio[2.5] < ratio[1.0]


class TestBatteryStudy:
    def test_histograms_per_gain(self, preset_params, preset_channel):
        study = battery_study(preset_params, preset_channel, [2e-5, 5e-5], ("vi", "greedy"),
                              sim=SimConfig(n_slots=2000))
        assert set(study) == {2e-5, 5e-5}
        for histograms in study.values():
            assert set(histograms) == {"vi", "greedy"}
            for histogram in histograms.values():
                assert len(histogram) == preset_params.b_c + 1
                assert histogram.sum() == pytest.approx(1.0)

    def test_rejects_empty(self, preset_params, preset_channel):
        with pytest.raises(ParameterError):
            battery_study(preset_params, preset_channel, [])


class TestSimConfig:
    @pytest.mark.parametrize("field, value", [("n_slots", 0), ("window", 0), ("seed", -1), ("curve_stride", 0)])
    def test_validation(self, field, value):
        with pytest.raises(ParameterError) as info:
            SimConfig(**{field: value})
        assert info.value.key == f"sim.{field}"


class TestCurveRows:
    def test_stride_keeps_last_point(self):
        rows = curve_rows(np.arange(10.0), window=5, stride=4)
        assert rows == [(5, 0.0), (9, 4.0), (13, 8.0), (14, 9.0)]

    def test_empty_curve(self):
        assert curve_rows(np.empty(0), window=5) == []


@pytest.mark.slow
def test_simulation_matches_long_run_average(preset_params, preset_channel, preset_model):
    _, policy = value_iteration(preset_model, SolverConfig().gamma)
    expected = long_run_average(preset_model, policy)
    metrics = run_policy(preset_params, preset_channel, policy, 1_000_000, SEED)
    assert metrics.mean_throughput == pytest.approx(expected, rel=0.005)
