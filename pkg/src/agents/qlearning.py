"""Tabular Q-learning for the harvest/backscatter mode decision.

The agent keeps a zero-initialized (state, action) table, acts
epsilon-greedily with an exploration probability ``eps0 / sqrt(t)`` that
decays per step, and applies the one-step update

    Q(s, a) <- Q(s, a) + alpha * (r + gamma * max_a' Q(s', a') - Q(s, a))

where the max runs over actions feasible at s'. Writing the max around the
whole bracket gives the same value because Q(s, a) and r do not depend on a'.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..channel import GainMarkov
from ..constants import (
    ACTION_BACKSCATTER,
    ACTION_HARVEST,
    DEFAULT_ALPHA,
    DEFAULT_EPS0,
    DEFAULT_GAMMA,
    DEFAULT_MAX_STEPS,
    DEFAULT_QL_SEED,
    STREAM_TRAINING,
)
from ..exceptions import AgentError, ParameterError
from ..mdp import Policy
from ..model import State, SystemParams, rate_table, transition_table
from ..random_streams import stream
from ..utils import setup_logging
from .environment import BackscatterEnv

logger = setup_logging(__name__)


@dataclass(frozen=True)
class QLConfig:
    """Hyperparameters of one training run.

    Attributes:
        alpha: Constant learning rate in (0, 1]
        eps0: Base exploration probability in [0, 1]
        max_steps: Training-step budget
        gamma: Discount in (0, 1)
        seed: Seed of the training stream
    """

    alpha: float = DEFAULT_ALPHA
    eps0: float = DEFAULT_EPS0
    max_steps: int = DEFAULT_MAX_STEPS
    gamma: float = DEFAULT_GAMMA
    seed: int = DEFAULT_QL_SEED

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ParameterError("ql.alpha", "must lie in (0, 1]")
        if not 0.0 <= self.eps0 <= 1.0:
            raise ParameterError("ql.eps0", "must lie in [0, 1]")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ParameterError("ql.seed", "must be a non-negative integer")


@dataclass(eq=False)
class QTable:
    """Mutable (S, 2) action-value table with the feasibility mask of its model."""

    q: np.ndarray
    feasible: np.ndarray
    n_gains: int

    @classmethod
    def zeros(cls, params: SystemParams) -> "QTable":
        feasible = (transition_table(params) >= 0).reshape(params.n_states, 2)
        return cls(np.zeros((params.n_states, 2)), feasible, params.n_gains)

    def flat(self, state: int | State) -> int:
        if isinstance(state, tuple):
            return state[0] * self.n_gains + state[1]
        return int(state)

    def best_value(self, state: int | State) -> float:
        s = self.flat(state)
        return float(self.q[s][self.feasible[s]].max())

    def greedy_action(self, state: int | State) -> int:
        """argmax over feasible actions; ties go to harvest."""
        s = self.flat(state)
        if self.feasible[s, ACTION_BACKSCATTER] and self.q[s, ACTION_BACKSCATTER] > self.q[s, ACTION_HARVEST]:
            return ACTION_BACKSCATTER
        return ACTION_HARVEST


class TrainingResult(NamedTuple):
    table: QTable
    policy: Policy
    rewards: np.ndarray


def epsilon_schedule(t: int, eps0: float) -> float:
    """Exploration probability at step ``t``: ``eps0 / sqrt(t)`` clamped to [0, 1].

    Example:
        >>> epsilon_schedule(4, 0.2)
        0.1
    """
    if t < 1:
        raise AgentError(f"step index must be >= 1, got {t}")
    return min(1.0, max(0.0, eps0 / math.sqrt(t)))


def q_update(table: QTable, s: int | State, a: int, r: float, s_next: int | State,
             alpha: float, gamma: float) -> float:
    """Update the single entry Q(s, a) in place and return its new value."""
    i = table.flat(s)
    if not table.feasible[i, int(a)]:
        raise AgentError(f"action {a} is not feasible at state {i}")
    target = r + gamma * table.best_value(s_next)
    table.q[i, a] += alpha * (target - table.q[i, a])
    return float(table.q[i, a])


def q_policy(table: QTable, name: str = "ql") -> Policy:
    """Greedy policy of the table over feasible actions (ties to harvest)."""
    masked = np.where(table.feasible, table.q, -np.inf)
    return Policy(np.argmax(masked, axis=1), name=name)


def train_q_learning(params: SystemParams, channel: GainMarkov, config: QLConfig) -> TrainingResult:
    """Run epsilon-greedy Q-learning for ``config.max_steps`` slots.

    The start state is uniform over S. At step t a uniform draw p0 below
    ``epsilon_schedule(t, eps0)`` selects a uniformly random feasible
    action; otherwise the greedy action is taken. All draws, including the
    channel, come from the training stream of ``config.seed``, so identical
    inputs give a bit-identical table.

    Returns:
        TrainingResult with the final table, its greedy policy and the
        per-step reward trace

    Raises:
        AgentError: Non-positive step budget, discount outside (0, 1), or a
            Q-value escaping the bound R_max / (1 - gamma) + R_max
    """
    if config.max_steps <= 0:
        raise AgentError(f"max_steps must be positive, got {config.max_steps}")
    if not 0.0 < config.gamma < 1.0:
        raise AgentError(f"Q-learning needs a discount in (0, 1), got {config.gamma}")

    rng = stream(config.seed, STREAM_TRAINING)
    env = BackscatterEnv(params, channel, rng)
    table = QTable.zeros(params)
    r_max = float(np.max(rate_table(params)))
    bound = r_max / (1.0 - config.gamma) + r_max

    state = env.reset()
    s = state.index(params.n_gains)
    rewards = np.empty(config.max_steps)
    explored = 0
    for t in range(1, config.max_steps + 1):
        if rng.random() < epsilon_schedule(t, config.eps0):
            options = env.feasible()
            action = options[int(rng.integers(len(options)))]
            explored += 1
        else:
            action = table.greedy_action(s)
        next_state, reward = env.step(action)
        s_next = next_state.index(params.n_gains)
        value = q_update(table, s, action, reward, s_next, config.alpha, config.gamma)
        if abs(value) > bound:
            raise AgentError(f"Q({s}, {action}) = {value:.6g} exceeds bound {bound:.6g} at step {t}")
        rewards[t - 1] = reward
        s = s_next

    policy = q_policy(table)
    logger.info(
        "Q-learning finished %d steps (%d exploratory), mean reward %.6g bits/slot",
        config.max_steps, explored, float(rewards.mean()),
    )
    return TrainingResult(table, policy, rewards)


def rolling_average(trace: np.ndarray, window: int) -> np.ndarray:
    """Mean of each full window of ``window`` consecutive entries.

    Element i averages ``trace[i:i + window]``, i.e. the curve point at step
    ``i + window``. Shorter traces give an empty curve.
    """
    if window < 1:
        raise AgentError(f"window must be >= 1, got {window}")
    trace = np.asarray(trace, dtype=float)
    if len(trace) < window:
        return np.empty(0)
    totals = np.concatenate(([0.0], np.cumsum(trace)))
    return (totals[window:] - totals[:-window]) / window


def saturation_ratio(trace: np.ndarray, blocks: int = 10) -> float:
    """Mean of the final block over the best block mean, splitting ``trace`` into ``blocks``."""
    parts = np.array_split(np.asarray(trace, dtype=float), blocks)
    means = np.array([p.mean() for p in parts if len(p)])
    best = float(means.max())
    return float(means[-1] / best) if best > 0 else 1.0

