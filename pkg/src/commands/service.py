"""Experiment commands bound to one run configuration.

Each command writes its CSV files and a manifest into the output
directory. The manifest is itself a loadable config, so a run can be
repeated from it alone.
"""

from pathlib import Path
from typing import Callable, Optional

import numpy as np

from ..agents import rolling_average, train_q_learning
from ..config import RunConfig, dump_config
from ..constants import (
    ACTION_NAMES,
    CSV_BATTERY_HIST,
    CSV_DETECTOR,
    CSV_LEARNING_CURVE,
    CSV_POLICY,
    CSV_QTABLE,
    CSV_REPORT,
    CSV_SUMMARY,
    CSV_SWEEP,
    CSV_SWEEP_ANALYTIC,
    CSV_TRACE,
    MANIFEST_FILE,
)
from ..detector import DetectorConfig, detector_ber_formula, detector_ber_mc
from ..exceptions import BackscatterError, OutputError
from ..mdp import (
    bellman_residual,
    build_mdp,
    is_monotone_in_battery,
    policy_thresholds,
    stationary_distribution,
    value_iteration,
)
from ..model import StateSpace
from ..simulation import (
    analytic_average,
    battery_study,
    build_policy,
    curve_rows,
    run_policy,
    sweep_power,
)
from ..utils import format_power_tag, setup_logging, write_csv

logger = setup_logging(__name__)


class ExperimentService:
    """Runs the toolkit's commands for one RunConfig.

    Attributes:
        config: Validated run configuration
        output_dir: Directory receiving CSVs and the manifest
        logger: Logger instance

    Example:
        >>> service = ExperimentService(load_config())
        >>> paths = service.solve()
    """

    def __init__(self, config: RunConfig, output_dir: Optional[str | Path] = None):
        self.config = config
        self.output_dir = Path(output_dir or config.output)
        self.logger = logger
        self.logger.info("Experiment service ready (output: %s)", self.output_dir)

    def _path(self, name: str) -> Path:
        return self.output_dir / name

    def _write_manifest(self, command: str) -> Path:
        path = self._path(MANIFEST_FILE)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(dump_config(self.config.to_dict(command)), encoding="utf-8")
        except OSError as e:
            raise OutputError(str(path), str(e))
        return path

    def _run(self, command: str, body: Callable[[], list[Path]]) -> list[Path]:
        """Execute a command with consistent logging, then record its manifest."""
        self.logger.info("Running %s", command)
        try:
            written = body()
        except BackscatterError as e:
            self.logger.error("%s failed: %s", command, e)
            raise
        written.append(self._write_manifest(command))
        for path in written:
            self.logger.info("Wrote %s", path)
        self.logger.info("%s finished (%d files)", command, len(written))
        return written

    def solve(self) -> list[Path]:
        """Value iteration: policy.csv and solver_report.csv."""
        return self._run("solve", self._solve)

    def _solve(self) -> list[Path]:
        cfg = self.config
        model = build_mdp(cfg.system, cfg.channel, cfg.sim.e_initial, cfg.sim.initial_gain)
        value, policy = value_iteration(model, cfg.solver.gamma, cfg.solver.theta, cfg.solver.max_iterations)
        space = model.space
        policy_rows = [
            (s, b, g, value[s], ACTION_NAMES[policy[s]])
            for s, (b, g) in enumerate(space)
        ]
        report = [
            ("states", model.n_states),
            ("gamma", cfg.solver.gamma),
            ("theta", cfg.solver.theta),
            ("iterations", value.iterations),
            ("final_delta", value.delta),
            ("bellman_residual", bellman_residual(model, value, cfg.solver.gamma)),
            ("long_run_average_bits_per_slot", analytic_average(model, policy)),
            ("monotone_in_battery", is_monotone_in_battery(model, policy)),
        ]
        for g, threshold in policy_thresholds(model, policy).items():
            report.append((f"threshold_gain_{g}", "none" if threshold is None else threshold))
        if not policy.actions.any():
            self.logger.warning("Optimal policy never backscatters")
        return [
            write_csv(self._path("policy.csv"), CSV_POLICY, policy_rows),
            write_csv(self._path("solver_report.csv"), CSV_REPORT, report),
        ]

    def train(self) -> list[Path]:
        """Q-learning: qtable.csv and learning_curve.csv."""
        return self._run("train", self._train)

    def _train(self) -> list[Path]:
        cfg = self.config
        training = train_q_learning(cfg.system, cfg.channel, cfg.ql)
        table = training.table
        space = StateSpace.of(cfg.system)
        rows = [
            (s, b, g, table.q[s, 0], table.q[s, 1], ACTION_NAMES[training.policy[s]])
            for s, (b, g) in enumerate(space)
        ]
        curve = rolling_average(training.rewards, cfg.sim.window)
        return [
            write_csv(self._path("qtable.csv"), CSV_QTABLE, rows),
            write_csv(self._path("learning_curve.csv"), CSV_LEARNING_CURVE,
                      curve_rows(curve, cfg.sim.window, cfg.sim.curve_stride)),
        ]

    def simulate(self) -> list[Path]:
        """Evaluate the configured method: trace, battery histogram and summary CSVs."""
        return self._run("simulate", self._simulate)

    def _simulate(self) -> list[Path]:
        cfg = self.config
        sim = cfg.sim
        method = cfg.method
        built = build_policy(method, cfg.system, cfg.channel, cfg.solver, cfg.ql,
                             sim.e_initial, sim.initial_gain)
        metrics = run_policy(cfg.system, cfg.channel, built.policy, sim.n_slots, sim.seed,
                             sim.e_initial, sim.initial_gain, sim.window)

        trace = zip(range(sim.n_slots), metrics.gain_path, metrics.battery_trace,
                    (ACTION_NAMES[a] for a in metrics.actions.tolist()), metrics.per_slot_rate)
        histogram = [(method, level, p) for level, p in enumerate(metrics.battery_histogram)]
        try:
            occupancy = stationary_distribution(built.model, built.policy)
            levels = occupancy.reshape(cfg.system.b_c + 1, cfg.system.n_gains).sum(axis=1)
            histogram += [(f"{method}_stationary", level, p) for level, p in enumerate(levels)]
        except BackscatterError as e:
            self.logger.warning("Skipping stationary histogram: %s", e)
        summary = [(
            method,
            metrics.mean_throughput,
            metrics.mode_counts["harvest"],
            metrics.mode_counts["backscatter"],
            analytic_average(built.model, built.policy),
        )]
        return [
            write_csv(self._path("trace.csv"), CSV_TRACE, [tuple(row) for row in trace]),
            write_csv(self._path("battery_hist.csv"), CSV_BATTERY_HIST, histogram),
            write_csv(self._path("summary.csv"), CSV_SUMMARY, summary),
        ]

    def sweep(self) -> list[Path]:
        """Power sweep: sweep.csv, sweep_analytic.csv and one learning curve per power."""
        return self._run("sweep", self._sweep)

    def _sweep(self) -> list[Path]:
        cfg = self.config
        result = sweep_power(cfg.system, list(cfg.sweep.powers), cfg.channel, cfg.sweep.methods,
                             cfg.solver, cfg.ql, cfg.sim, cfg.sweep.workers)
        written = [
            write_csv(self._path("sweep.csv"), CSV_SWEEP, result.rows()),
            write_csv(self._path("sweep_analytic.csv"), CSV_SWEEP_ANALYTIC, result.analytic_rows()),
        ]
        for p_t, curve in result.learning_curves().items():
            name = f"learning_curve_pt{format_power_tag(p_t)}.csv"
            written.append(write_csv(self._path(name), CSV_LEARNING_CURVE,
                                     curve_rows(curve, cfg.sim.window, cfg.sim.curve_stride)))
        return written

    def detector_check(self) -> list[Path]:
        """Detector Monte Carlo against the closed-form BER: detector.csv."""
        return self._run("detector-check", self._detector_check)

    def _detector_check(self) -> list[Path]:
        cfg = self.config
        det = cfg.detector
        p = cfg.system
        gains = det.gain_values if det.gain_values is not None else p.gains
        rows = []
        for g in gains:
            config = DetectorConfig(
                gain_value=float(g), params=p, bits=det.bits, seed=det.seed,
                ambient=det.ambient, tag_phase=det.tag_phase, chunk_samples=det.chunk_samples,
            )
            result = detector_ber_mc(config)
            rows.append((g, p.h, p.p_t, p.mu, p.n_s, det.bits, result.ber, result.stderr,
                         detector_ber_formula(config), result.z_mean_0, result.z_mean_1))
        return [write_csv(self._path("detector.csv"), CSV_DETECTOR, rows)]

    def battery_study(self) -> list[Path]:
        """Battery occupancy per tag-to-receiver gain: battery_hist_h<h>.csv."""
        return self._run("battery-study", self._battery_study)

    def _battery_study(self) -> list[Path]:
        cfg = self.config
        study = battery_study(cfg.system, cfg.channel, cfg.battery_study.h_values,
                              cfg.battery_study.methods, cfg.solver, cfg.ql, cfg.sim)
        written = []
        for h, histograms in study.items():
            rows = [
                (method, level, p)
                for method, histogram in histograms.items()
                for level, p in enumerate(np.asarray(histogram).tolist())
            ]
            name = f"battery_hist_h{format_power_tag(h)}.csv"
            written.append(write_csv(self._path(name), CSV_BATTERY_HIST, rows))
        return written
