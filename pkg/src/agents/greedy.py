"""Threshold baseline that backscatters whenever it can."""

import numpy as np

from ..mdp import Policy
from ..model import StateSpace, SystemParams


def greedy_policy(params: SystemParams) -> Policy:
    """Backscatter iff the battery holds at least ``k_cost`` units; the gain is ignored."""
    space = StateSpace.of(params)
    return Policy((space.battery >= params.k_cost).astype(np.int64), name="greedy")
