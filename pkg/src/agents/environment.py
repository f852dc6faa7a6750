"""Slot-level environment of the tag for model-free learning."""

from typing import Optional

import numpy as np

from ..channel import GainMarkov, channel_step
from ..exceptions import InfeasibleActionError, ParameterError
from ..model import State, StateSpace, SystemParams, rate_table, transition_table


class BackscatterEnv:
    """Tag battery and channel gain advanced one slot per ``step``.

    The battery move comes from the precomputed transition table, the gain
    from one ``channel_step`` draw on the environment's generator. The
    reward of a slot is the backscatter rate of the gain at the start of
    the slot, or 0 when harvesting.

    Attributes:
        params: System configuration
        channel: Gain transition model
        rng: Generator consumed by channel draws (and by ``reset``)
        state: Current state, None before ``reset``

    Example:
        >>> env = BackscatterEnv(params, channel, stream(7, STREAM_TRAINING))
        >>> state = env.reset()
        >>> next_state, reward = env.step(0)
    """

    def __init__(self, params: SystemParams, channel: GainMarkov, rng: np.random.Generator):
        if channel.n_gains != params.n_gains:
            raise ParameterError(
                "channel.matrix", f"has {channel.n_gains} rows for {params.n_gains} gain levels"
            )
        self.params = params
        self.channel = channel
        self.rng = rng
        self.space = StateSpace.of(params)
        self.state: Optional[State] = None
        self._next = transition_table(params)
        self._rates = rate_table(params)

    def reset(self, state: Optional[State] = None) -> State:
        """Start from ``state``, or from a state drawn uniformly over S."""
        if state is None:
            state = self.space.decode(int(self.rng.integers(self.space.size)))
        else:
            self.space.index(*state)
        self.state = State(int(state[0]), int(state[1]))
        return self.state

    def feasible(self, state: Optional[State] = None) -> tuple[int, ...]:
        """Action codes available at ``state`` (current state by default), harvest first."""
        b, g = self.state if state is None else state
        return tuple(a for a in (0, 1) if self._next[b, g, a] >= 0)

    def step(self, action: int) -> tuple[State, float]:
        """Apply ``action`` for one slot.

        Returns:
            (next state, reward in bits)

        Raises:
            InfeasibleActionError: Backscatter with battery below k_cost
        """
        if self.state is None:
            raise RuntimeError("reset() must be called before step()")
        b, g = self.state
        a = int(action)
        b_next = int(self._next[b, g, a])
        if b_next < 0:
            raise InfeasibleActionError(b, self.params.k_cost)
        reward = a * float(self._rates[g])
        self.state = State(b_next, channel_step(self.rng, g, self.channel))
        return self.state, reward
