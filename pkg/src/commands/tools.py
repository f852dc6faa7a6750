"""Command definitions and dispatch helpers."""

from pathlib import Path
from typing import Callable

from .service import ExperimentService


COMMAND_SPECS: list[tuple[str, str]] = [
    ("solve", "Solve the MDP by value iteration; write policy.csv and solver_report.csv"),
    ("train", "Train the Q-learning agent; write qtable.csv and learning_curve.csv"),
    ("simulate", "Simulate the configured method; write trace, battery histogram and summary CSVs"),
    ("sweep", "Sweep the source power for every method; write sweep.csv and learning curves"),
    ("detector-check", "Compare the energy-detector Monte Carlo with the closed-form BER"),
    ("battery-study", "Battery occupancy per tag-to-receiver gain; write battery_hist_h<h>.csv"),
]

COMMANDS: list[str] = [name for name, _ in COMMAND_SPECS]


def build_command_dispatch(service: ExperimentService) -> dict[str, Callable[[], list[Path]]]:
    """Build a mapping of command names to bound service methods."""
    dispatch: dict[str, Callable[[], list[Path]]] = {}

    for name, _ in COMMAND_SPECS:
        method = getattr(service, name.replace("-", "_"), None)
        if method is None:
            raise AttributeError(f"ExperimentService missing expected method for {name}")
        dispatch[name] = method

    return dispatch


__all__ = ["COMMANDS", "COMMAND_SPECS", "build_command_dispatch"]
