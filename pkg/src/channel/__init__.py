"""Channel package: Markov gain model, sampling and stationary analysis."""

from .markov import (
    GainMarkov,
    channel_step,
    draw_initial,
    gain_stationary,
    sample_path,
    validate_stochastic,
)

__all__ = [
    "GainMarkov",
    "channel_step",
    "draw_initial",
    "gain_stationary",
    "sample_path",
    "validate_stochastic",
]
