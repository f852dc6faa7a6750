"""Simulation package: slot-level evaluation, sweeps and occupancy studies."""

from .harness import (
    BuiltPolicy,
    Metrics,
    SimConfig,
    SweepCell,
    SweepResult,
    analytic_average,
    battery_study,
    build_policy,
    channel_path,
    compare_policies,
    curve_rows,
    learning_curves,
    run_policy,
    simulate_path,
    sweep_power,
)

__all__ = [
    "BuiltPolicy",
    "Metrics",
    "SimConfig",
    "SweepCell",
    "SweepResult",
    "analytic_average",
    "battery_study",
    "build_policy",
    "channel_path",
    "compare_policies",
    "curve_rows",
    "learning_curves",
    "run_policy",
    "simulate_path",
    "sweep_power",
]
