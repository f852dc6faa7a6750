"""Exact MDP over (battery x gain) states of the backscatter tag."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..channel import GainMarkov, gain_stationary
from ..constants import ACTION_BACKSCATTER, ACTION_HARVEST, STOCHASTIC_TOLERANCE
from ..exceptions import ParameterError, SolverError
from ..model import StateSpace, SystemParams, harvest_table, rate_table, transition_table
from ..utils import setup_logging

logger = setup_logging(__name__)


@dataclass(frozen=True, eq=False)
class MdpModel:
    """Reward table, transition kernel and feasibility mask.

    Attributes:
        reward: (S, A) bits per slot for taking action a in state s
        kernel: (S, A, S) successor probabilities; zero slices for infeasible pairs
        feasible: (S, A) boolean mask of allowed actions
        initial: (S,) initial state distribution
        space: Optional state enumeration when built from SystemParams
    """

    reward: np.ndarray
    kernel: np.ndarray
    feasible: np.ndarray
    initial: Optional[np.ndarray] = None
    space: Optional[StateSpace] = field(default=None, repr=False)

    def __post_init__(self):
        reward = np.asarray(self.reward, dtype=float)
        kernel = np.asarray(self.kernel, dtype=float)
        feasible = np.asarray(self.feasible, dtype=bool)
        n_states, n_actions = reward.shape
        if kernel.shape != (n_states, n_actions, n_states) or feasible.shape != reward.shape:
            raise SolverError(
                f"inconsistent shapes reward={reward.shape} kernel={kernel.shape} feasible={feasible.shape}"
            )
        if not feasible.any(axis=1).all():
            raise SolverError("every state needs at least one feasible action")
        sums = kernel.sum(axis=2)
        bad = feasible & (np.abs(sums - 1.0) > STOCHASTIC_TOLERANCE)
        if bad.any():
            s, a = np.argwhere(bad)[0]
            raise SolverError(
                f"kernel row (s={s}, a={a}) does not sum to 1", residual=float(sums[s, a] - 1.0)
            )
        if np.any(kernel[~feasible] != 0):
            raise SolverError("infeasible state-action pairs must carry no kernel mass")
        initial = self.initial
        if initial is None:
            initial = np.zeros(n_states)
            initial[0] = 1.0
        initial = np.asarray(initial, dtype=float)
        for name, value in (("reward", reward), ("kernel", kernel), ("feasible", feasible), ("initial", initial)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def n_states(self) -> int:
        return self.reward.shape[0]

    @property
    def n_actions(self) -> int:
        return self.reward.shape[1]

    @property
    def r_max(self) -> float:
        return float(np.max(np.abs(self.reward[self.feasible]))) if self.feasible.any() else 0.0


@dataclass(frozen=True, eq=False)
class Policy:
    """Deterministic action per flat state index."""

    actions: np.ndarray
    name: str = "policy"

    def __post_init__(self):
        actions = np.array(self.actions, dtype=np.int64)
        actions.setflags(write=False)
        object.__setattr__(self, "actions", actions)

    def __getitem__(self, state_index: int) -> int:
        return int(self.actions[state_index])

    def __len__(self) -> int:
        return len(self.actions)

    def check_feasible(self, feasible: np.ndarray) -> None:
        """Raise ParameterError if any state maps to an infeasible action."""
        if len(self.actions) != feasible.shape[0]:
            raise ParameterError(
                "policy", f"{self.name} covers {len(self.actions)} states, model has {feasible.shape[0]}"
            )
        ok = feasible[np.arange(len(self.actions)), self.actions]
        if not ok.all():
            s = int(np.argmin(ok))
            raise ParameterError("policy", f"{self.name} picks infeasible action at state {s}")

    def same_actions(self, other: "Policy") -> bool:
        return np.array_equal(self.actions, other.actions)


@dataclass(frozen=True, eq=False)
class ValueFunction:
    """Discounted value per flat state index, in bits.

    ``iterations`` and ``delta`` record the sweeps and final sup-norm change
    when the values come from value iteration.
    """

    values: np.ndarray
    iterations: int = 0
    delta: float = 0.0

    def __getitem__(self, state_index: int) -> float:
        return float(self.values[state_index])

    def sup_distance(self, other: "ValueFunction") -> float:
        return float(np.max(np.abs(self.values - other.values)))


def initial_distribution(params: SystemParams, channel: GainMarkov, e_initial: int = 0,
                         initial_gain: Optional[int] = None) -> np.ndarray:
    """Battery fixed at ``e_initial``; gain fixed or stationary."""
    space = StateSpace.of(params)
    if not 0 <= e_initial <= params.b_c:
        raise ParameterError("e_initial", f"{e_initial} outside [0, {params.b_c}]")
    dist = np.zeros(space.size)
    if initial_gain is None:
        gains = gain_stationary(channel)
    else:
        if not 0 <= initial_gain < params.n_gains:
            raise ParameterError("initial_gain", f"{initial_gain} outside [0, {params.n_gains - 1}]")
        gains = np.zeros(params.n_gains)
        gains[initial_gain] = 1.0
    dist[e_initial * params.n_gains:(e_initial + 1) * params.n_gains] = gains
    return dist


def build_mdp(params: SystemParams, channel: GainMarkov, e_initial: int = 0,
              initial_gain: Optional[int] = None) -> MdpModel:
    """Assemble reward and kernel over all (B_c + 1)(Y + 1) states.

    The battery move is deterministic given (s, a); the gain moves by the
    channel row of the current gain. Infeasible (s, backscatter) pairs are
    masked and carry no kernel mass.
    """
    if channel.n_gains != params.n_gains:
        raise ParameterError(
            "channel.matrix", f"is {channel.n_gains}x{channel.n_gains} but there are {params.n_gains} gain levels"
        )
    space = StateSpace.of(params)
    n = space.size
    rates = rate_table(params)
    nxt = transition_table(params)

    reward = np.zeros((n, 2))
    kernel = np.zeros((n, 2, n))
    feasible = np.zeros((n, 2), dtype=bool)
    for s in range(n):
        b, g = int(space.battery[s]), int(space.gain[s])
        for a in (ACTION_HARVEST, ACTION_BACKSCATTER):
            b_next = nxt[b, g, a]
            if b_next < 0:
                continue
            feasible[s, a] = True
            reward[s, a] = a * rates[g]
            start = b_next * params.n_gains
            kernel[s, a, start:start + params.n_gains] = channel.matrix[g]

    model = MdpModel(
        reward=reward,
        kernel=kernel,
        feasible=feasible,
        initial=initial_distribution(params, channel, e_initial, initial_gain),
        space=space,
    )
    logger.info(
        "Built MDP with %d states (B_c=%d, %d gain levels, harvest units %s)",
        n, params.b_c, params.n_gains, harvest_table(params).tolist(),
    )
    return model
