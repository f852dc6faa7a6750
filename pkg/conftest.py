"""Shared fixtures: the bundled preset and the 8-state reduced instance."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Setup path
PROJECT_ROOT = Path(__file__).parent
sys.path.insert(0, str(PROJECT_ROOT))

from src.channel import GainMarkov
from src.constants import DEFAULT_SETUP, DEFAULT_CHANNEL_MATRIX
from src.mdp import build_mdp
from src.model import SystemParams


@pytest.fixture
def preset_params() -> SystemParams:
    return SystemParams(**DEFAULT_SETUP["system"])


@pytest.fixture
def preset_channel() -> GainMarkov:
    return GainMarkov(np.array(DEFAULT_CHANNEL_MATRIX))


@pytest.fixture
def preset_model(preset_params, preset_channel):
    return build_mdp(preset_params, preset_channel)


@pytest.fixture
def small_params(preset_params) -> SystemParams:
    """B_c = 3, two gain levels (Y = 1), j = 1, k = 2: 8 states.

    The unit is half the preset's so the upper gain harvests 2 units and
    the battery can grow.
    """
    return SystemParams(
        eta=preset_params.eta,
        p_t=preset_params.p_t,
        t0=preset_params.t0,
        r_b=preset_params.r_b,
        mu=preset_params.mu,
        n_s=preset_params.n_s,
        delta0_sq=preset_params.delta0_sq,
        delta1_sq=preset_params.delta1_sq,
        h=preset_params.h,
        gains=(1.5e-5, 3e-5),
        e0=preset_params.eta * 1.5e-5 * preset_params.p_t * preset_params.t0 / 2.0,
        b_c=3,
        j_cost=1,
        k_cost=2,
    )


@pytest.fixture
def small_channel() -> GainMarkov:
    return GainMarkov(np.full((2, 2), 0.5))


@pytest.fixture
def small_model(small_params, small_channel):
    return build_mdp(small_params, small_channel)
