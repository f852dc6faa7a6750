"""Agents package: Q-learning, the greedy baseline and the training environment."""

from .environment import BackscatterEnv
from .greedy import greedy_policy
from .qlearning import (
    QLConfig,
    QTable,
    TrainingResult,
    epsilon_schedule,
    q_policy,
    q_update,
    rolling_average,
    saturation_ratio,
    train_q_learning,
)

__all__ = [
    "BackscatterEnv",
    "QLConfig",
    "QTable",
    "TrainingResult",
    "epsilon_schedule",
    "greedy_policy",
    "q_policy",
    "q_update",
    "rolling_average",
    "saturation_ratio",
    "train_q_learning",
]
