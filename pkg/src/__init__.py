"""Ambient backscatter mode selection - exact MDP, Q-learning and link simulation."""

__version__ = "0.1.0"
