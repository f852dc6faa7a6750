"""Slot-level episode simulator and experiment runners.

All policies evaluated with one seed consume the same pre-generated channel
path (common random numbers): the path depends only on the seed, the gain
matrix, the initial gain and the horizon, so independent jobs regenerate
identical paths.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, NamedTuple, Optional, Sequence

import numpy as np

from ..agents import QLConfig, TrainingResult, greedy_policy, rolling_average, train_q_learning
from ..channel import GainMarkov, draw_initial, sample_path
from ..constants import (
    ACTION_BACKSCATTER,
    DEFAULT_CURVE_STRIDE,
    DEFAULT_E_INITIAL,
    DEFAULT_N_SLOTS,
    DEFAULT_SIM_SEED,
    DEFAULT_WINDOW,
    METHOD_GREEDY,
    METHOD_QL,
    METHOD_VI,
    METHODS,
    STREAM_CHANNEL,
)
from ..exceptions import InfeasibleActionError, ParameterError, SolverError
from ..mdp import (
    MdpModel,
    Policy,
    SolverConfig,
    ValueFunction,
    build_mdp,
    long_run_average,
    value_iteration,
)
from ..model import SystemParams, rate_table, transition_table
from ..random_streams import stream
from ..utils import setup_logging

logger = setup_logging(__name__)


@dataclass(frozen=True)
class SimConfig:
    """Horizon, seed and initial conditions of an evaluation run.

    ``initial_gain = None`` draws the first gain from the stationary
    distribution of the channel.
    """

    n_slots: int = DEFAULT_N_SLOTS
    window: int = DEFAULT_WINDOW
    e_initial: int = DEFAULT_E_INITIAL
    initial_gain: Optional[int] = None
    seed: int = DEFAULT_SIM_SEED
    curve_stride: int = DEFAULT_CURVE_STRIDE

    def __post_init__(self):
        if self.n_slots < 1:
            raise ParameterError("sim.n_slots", "must be >= 1")
        if self.window < 1:
            raise ParameterError("sim.window", "must be >= 1")
        if self.curve_stride < 1:
            raise ParameterError("sim.curve_stride", "must be >= 1")
        if self.seed < 0:
            raise ParameterError("sim.seed", "must be non-negative")


@dataclass(frozen=True, eq=False)
class Metrics:
    """Per-slot outcome of one policy on one channel path.

    ``battery_trace[t]`` is the battery at the start of slot t, and the
    histogram counts those start-of-slot levels.
    """

    per_slot_rate: np.ndarray
    rolling_average: np.ndarray
    battery_histogram: np.ndarray
    mode_counts: dict[str, int]
    mean_throughput: float
    battery_trace: np.ndarray = field(repr=False)
    gain_path: np.ndarray = field(repr=False)
    actions: np.ndarray = field(repr=False)

    def fraction_below(self, level: int) -> float:
        return float(self.battery_histogram[:level].sum())

    def fraction_at_least(self, level: int) -> float:
        return float(self.battery_histogram[level:].sum())

    def same_as(self, other: "Metrics") -> bool:
        return (
            np.array_equal(self.per_slot_rate, other.per_slot_rate)
            and np.array_equal(self.battery_trace, other.battery_trace)
            and np.array_equal(self.gain_path, other.gain_path)
            and np.array_equal(self.actions, other.actions)
        )


class BuiltPolicy(NamedTuple):
    """A policy with the artifacts that produced it."""

    policy: Policy
    model: MdpModel
    value: Optional[ValueFunction] = None
    training: Optional[TrainingResult] = None


def channel_path(channel: GainMarkov, n_slots: int, seed: int,
                 initial_gain: Optional[int] = None) -> np.ndarray:
    """Gain path of a run; identical for every policy sharing ``seed``."""
    rng = stream(seed, STREAM_CHANNEL)
    first = draw_initial(rng, channel) if initial_gain is None else initial_gain
    return sample_path(rng, n_slots, first, channel)


def simulate_path(params: SystemParams, policy: Policy, gain_path: np.ndarray,
                  e_initial: int = DEFAULT_E_INITIAL, window: int = DEFAULT_WINDOW) -> Metrics:
    """Run ``policy`` over a fixed gain path.

    Raises:
        ParameterError: Infeasible policy or initial battery out of range
        InfeasibleActionError: Backscatter attempted below k_cost
    """
    table = transition_table(params)
    policy.check_feasible((table >= 0).reshape(params.n_states, 2))
    if not 0 <= e_initial <= params.b_c:
        raise ParameterError("sim.e_initial", f"{e_initial} outside [0, {params.b_c}]")

    nxt = table.tolist()
    rates = rate_table(params).tolist()
    acts = policy.actions.tolist()
    gains = np.asarray(gain_path, dtype=np.int64).tolist()
    n_gains = params.n_gains
    n = len(gains)
    battery = [0] * n
    actions = [0] * n
    earned = [0.0] * n

    b = int(e_initial)
    for t, g in enumerate(gains):
        a = acts[b * n_gains + g]
        b_next = nxt[b][g][a]
        if b_next < 0:
            raise InfeasibleActionError(b, params.k_cost)
        battery[t] = b
        actions[t] = a
        earned[t] = rates[g] if a == ACTION_BACKSCATTER else 0.0
        b = b_next

    battery_trace = np.array(battery, dtype=np.int64)
    action_trace = np.array(actions, dtype=np.int64)
    per_slot = np.array(earned)
    if battery_trace.min(initial=0) < 0 or battery_trace.max(initial=0) > params.b_c:
        raise SolverError("battery trajectory left [0, B_c]")
    histogram = np.bincount(battery_trace, minlength=params.b_c + 1) / max(n, 1)
    n_backscatter = int(action_trace.sum())
    return Metrics(
        per_slot_rate=per_slot,
        rolling_average=rolling_average(per_slot, window),
        battery_histogram=histogram,
        mode_counts={"harvest": n - n_backscatter, "backscatter": n_backscatter},
        mean_throughput=float(per_slot.mean()) if n else 0.0,
        battery_trace=battery_trace,
        gain_path=np.asarray(gain_path, dtype=np.int64),
        actions=action_trace,
    )


def run_policy(params: SystemParams, channel: GainMarkov, policy: Policy, n_slots: int,
               seed: int, e_initial: int = DEFAULT_E_INITIAL, initial_gain: Optional[int] = None,
               window: int = DEFAULT_WINDOW) -> Metrics:
    """Simulate ``policy`` for ``n_slots`` slots on the channel path of ``seed``."""
    if n_slots < 1:
        raise ParameterError("sim.n_slots", "must be >= 1")
    path = channel_path(channel, n_slots, seed, initial_gain)
    metrics = simulate_path(params, policy, path, e_initial, window)
    logger.debug("Policy %s: %.6g bits/slot over %d slots", policy.name, metrics.mean_throughput, n_slots)
    return metrics


def compare_policies(params: SystemParams, channel: GainMarkov,
                     policies: Sequence[Policy] | Mapping[str, Policy], n_slots: int, seed: int,
                     e_initial: int = DEFAULT_E_INITIAL, initial_gain: Optional[int] = None,
                     window: int = DEFAULT_WINDOW) -> dict[str, Metrics]:
    """Evaluate several policies on one shared channel path, keyed by policy name."""
    named = dict(policies) if isinstance(policies, Mapping) else {p.name: p for p in policies}
    path = channel_path(channel, n_slots, seed, initial_gain)
    results = {name: simulate_path(params, policy, path, e_initial, window) for name, policy in named.items()}
    for name, metrics in results.items():
        logger.info("%s: %.6g bits/slot (%d backscatter slots)",
                    name, metrics.mean_throughput, metrics.mode_counts["backscatter"])
    return results


def build_policy(method: str, params: SystemParams, channel: GainMarkov,
                 solver: SolverConfig = SolverConfig(), ql: QLConfig = QLConfig(),
                 e_initial: int = DEFAULT_E_INITIAL, initial_gain: Optional[int] = None) -> BuiltPolicy:
    """Solve, train or construct the policy of one method."""
    model = build_mdp(params, channel, e_initial, initial_gain)
    if method == METHOD_VI:
        value, policy = value_iteration(model, solver.gamma, solver.theta, solver.max_iterations)
        return BuiltPolicy(policy, model, value=value)
    if method == METHOD_QL:
        training = train_q_learning(params, channel, ql)
        return BuiltPolicy(training.policy, model, training=training)
    if method == METHOD_GREEDY:
        return BuiltPolicy(greedy_policy(params), model)
    raise ParameterError("method", f"must be one of {METHODS}, got {method!r}")


def analytic_average(model: MdpModel, policy: Policy) -> float:
    """``long_run_average``, or NaN (with a warning) when the chain has no unique recurrent class."""
    try:
        return long_run_average(model, policy)
    except SolverError as e:
        logger.warning("No analytic average for %s: %s", policy.name, e)
        return math.nan


@dataclass(frozen=True, eq=False)
class SweepCell:
    p_t: float
    method: str
    mean_throughput: float
    long_run_average: float
    learning_curve: Optional[np.ndarray] = None


@dataclass(frozen=True)
class SweepResult:
    """Rows of the power sweep in (power, method) order."""

    cells: list[SweepCell]

    def rows(self) -> list[tuple[float, str, float]]:
        return [(c.p_t, c.method, c.mean_throughput) for c in self.cells]

    def analytic_rows(self) -> list[tuple[float, str, float]]:
        return [(c.p_t, c.method, c.long_run_average) for c in self.cells]

    def throughput(self, p_t: float, method: str) -> float:
        for c in self.cells:
            if c.p_t == p_t and c.method == method:
                return c.mean_throughput
        raise KeyError((p_t, method))

    def learning_curves(self) -> dict[float, np.ndarray]:
        return {c.p_t: c.learning_curve for c in self.cells if c.learning_curve is not None}


class _SweepJob(NamedTuple):
    params: SystemParams
    channel_matrix: list
    method: str
    solver: SolverConfig
    ql: QLConfig
    sim: SimConfig


def _run_sweep_job(job: _SweepJob) -> SweepCell:
    channel = GainMarkov(np.array(job.channel_matrix))
    built = build_policy(job.method, job.params, channel, job.solver, job.ql,
                         job.sim.e_initial, job.sim.initial_gain)
    metrics = run_policy(job.params, channel, built.policy, job.sim.n_slots, job.sim.seed,
                         job.sim.e_initial, job.sim.initial_gain, job.sim.window)
    curve = None
    if built.training is not None:
        curve = rolling_average(built.training.rewards, job.sim.window)
    return SweepCell(
        p_t=job.params.p_t,
        method=job.method,
        mean_throughput=metrics.mean_throughput,
        long_run_average=analytic_average(built.model, built.policy),
        learning_curve=curve,
    )


def sweep_power(base: SystemParams, powers: Sequence[float], channel: GainMarkov,
                methods: Sequence[str] = METHODS, solver: SolverConfig = SolverConfig(),
                ql: QLConfig = QLConfig(), sim: SimConfig = SimConfig(), workers: int = 1) -> SweepResult:
    """Re-solve, retrain and evaluate every method at every source power.

    Each (power, method) cell is an independent job; with ``workers > 1``
    the jobs run in a process pool. The channel path and the training seed
    are the same for every cell.

    Raises:
        ParameterError: Empty or non-positive power list, unknown method
    """
    if not powers:
        raise ParameterError("sweep.powers", "must not be empty")
    if any(not p > 0 for p in powers):
        raise ParameterError("sweep.powers", "every power must be > 0")
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ParameterError("sweep.methods", f"unknown methods {unknown}")
    if base.e0 is not None:
        logger.warning("Explicit e0=%.6g J is rescaled with P_t across the sweep", base.e0)

    jobs = [
        _SweepJob(base.with_power(p), channel.to_list(), method, solver, ql, sim)
        for p in powers
        for method in methods
    ]
    logger.info("Sweeping %d powers x %d methods (%d workers)", len(powers), len(methods), workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_sweep_job, jobs))
    else:
        cells = [_run_sweep_job(job) for job in jobs]
    return SweepResult(cells)


def learning_curves(base: SystemParams, powers: Sequence[float], channel: GainMarkov,
                    ql: QLConfig = QLConfig(), window: int = DEFAULT_WINDOW) -> dict[float, np.ndarray]:
    """Rolling-average training reward per source power."""
    curves = {}
    for p in powers:
        training = train_q_learning(base.with_power(p), channel, ql)
        curves[float(p)] = rolling_average(training.rewards, window)
    return curves


def battery_study(base: SystemParams, channel: GainMarkov, h_values: Sequence[float],
                  methods: Sequence[str] = METHODS, solver: SolverConfig = SolverConfig(),
                  ql: QLConfig = QLConfig(), sim: SimConfig = SimConfig()) -> dict[float, dict[str, np.ndarray]]:
    """Battery-level occupancy per tag-to-receiver gain h and method.

    For each h the methods are rebuilt and compared on one shared path.
    """
    if not h_values:
        raise ParameterError("battery_study.h_values", "must not be empty")
    study: dict[float, dict[str, np.ndarray]] = {}
    for h in h_values:
        params = replace(base, h=float(h))
        policies = {
            m: build_policy(m, params, channel, solver, ql, sim.e_initial, sim.initial_gain).policy
            for m in methods
        }
        results = compare_policies(params, channel, policies, sim.n_slots, sim.seed,
                                   sim.e_initial, sim.initial_gain, sim.window)
        study[float(h)] = {m: metrics.battery_histogram for m, metrics in results.items()}
        logger.info(
            "h=%.6g: P(battery < k) %s", h,
            {m: round(metrics.fraction_below(params.k_cost), 4) for m, metrics in results.items()},
        )
    return study


def curve_rows(curve: np.ndarray, window: int, stride: int = DEFAULT_CURVE_STRIDE) -> list[tuple[int, float]]:
    """(step, value) rows of a rolling-average curve, every ``stride`` steps plus the last point."""
    picks = list(range(0, len(curve), stride))
    if curve.size and picks[-1] != len(curve) - 1:
        picks.append(len(curve) - 1)
    return [(i + window, float(curve[i])) for i in picks]
