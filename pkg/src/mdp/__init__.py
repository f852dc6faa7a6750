"""MDP package: model construction, exact solvers and oracles."""

from .model import MdpModel, Policy, ValueFunction, build_mdp, initial_distribution
from .solver import (
    SolverConfig,
    action_values,
    bellman_residual,
    brute_force_optimal,
    is_monotone_in_battery,
    long_run_average,
    policy_evaluation_exact,
    policy_thresholds,
    stationary_distribution,
    value_iteration,
)

__all__ = [
    "MdpModel",
    "Policy",
    "SolverConfig",
    "ValueFunction",
    "action_values",
    "bellman_residual",
    "brute_force_optimal",
    "build_mdp",
    "initial_distribution",
    "is_monotone_in_battery",
    "long_run_average",
    "policy_evaluation_exact",
    "policy_thresholds",
    "stationary_distribution",
    "value_iteration",
]
