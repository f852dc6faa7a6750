"""Finite-state Markov model of the ambient channel gain."""

import bisect
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import csgraph

from ..constants import POWER_ITERATION_CAP, STATIONARY_TOLERANCE, STOCHASTIC_TOLERANCE
from ..exceptions import ChannelError
from ..utils import setup_logging

logger = setup_logging(__name__)


def validate_stochastic(matrix: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
    """Check that ``matrix`` is square and row-stochastic.

    Returns:
        The matrix as a float array

    Raises:
        ChannelError: Non-square shape, entry outside [0, 1], or a row whose
            sum differs from 1 by more than 1e-12 (row and residual reported)
    """
    m = np.array(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ChannelError(f"matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ChannelError("matrix has non-finite entries")
    for i, row in enumerate(m):
        if np.any(row < 0):
            raise ChannelError("negative entry", row=i, residual=float(row.min()))
        if np.any(row > 1):
            raise ChannelError("entry above 1", row=i, residual=float(row.max() - 1.0))
        residual = float(row.sum() - 1.0)
        if abs(residual) > STOCHASTIC_TOLERANCE:
            raise ChannelError("row does not sum to 1", row=i, residual=residual)
    return m


@dataclass(frozen=True, eq=False)
class GainMarkov:
    """Row-stochastic gain transition matrix; immutable after validation.

    ``matrix[i][j]`` is the probability of moving from level G_i to G_j.
    """

    matrix: np.ndarray
    _cdf: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = validate_stochastic(self.matrix)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_cdf", tuple(_row_cdf(row) for row in m))

    @property
    def n_gains(self) -> int:
        return self.matrix.shape[0]

    def row_cdf(self, current: int) -> list[float]:
        return self._cdf[current]

    def to_list(self) -> list[list[float]]:
        return self.matrix.tolist()


def _row_cdf(row: np.ndarray) -> list[float]:
    cdf = np.cumsum(row).tolist()
    cdf[-1] = 1.0
    return cdf


def _inverse_cdf(cdf: list[float], u: float) -> int:
    # first index whose cumulative probability exceeds u
    return min(bisect.bisect_right(cdf, u), len(cdf) - 1)


def channel_step(rng: np.random.Generator, current: int, channel: GainMarkov) -> int:
    """Draw the next gain index from row ``current`` with one uniform variate."""
    return _inverse_cdf(channel.row_cdf(current), rng.random())


def sample_path(rng: np.random.Generator, n: int, initial: int, channel: GainMarkov) -> np.ndarray:
    """``n`` successive gain indices starting at ``initial`` (``path[0] == initial``).

    Consumes exactly ``n - 1`` uniforms from ``rng``, in the same order as
    repeated ``channel_step`` calls.
    """
    if not 0 <= initial < channel.n_gains:
        raise ChannelError(f"initial gain index {initial} outside [0, {channel.n_gains - 1}]")
    path = np.empty(n, dtype=np.int64)
    if n == 0:
        return path
    uniforms = rng.random(n - 1).tolist()
    cdf = channel._cdf
    current = int(initial)
    path[0] = current
    for t, u in enumerate(uniforms, start=1):
        current = _inverse_cdf(cdf[current], u)
        path[t] = current
    return path


def gain_stationary(channel: GainMarkov, tol: float = STATIONARY_TOLERANCE,
                    max_iterations: int = POWER_ITERATION_CAP) -> np.ndarray:
    """Stationary distribution of the gain chain by power iteration.

    Raises:
        ChannelError: The chain is reducible, or the iteration does not
            settle within ``max_iterations`` (periodic chain)
    """
    m = channel.matrix
    n_components, _ = csgraph.connected_components(m > 0, directed=True, connection="strong")
    if n_components > 1:
        raise ChannelError(f"chain is reducible ({n_components} communicating classes)")

    pi = np.zeros(m.shape[0])
    pi[0] = 1.0
    for iteration in range(1, max_iterations + 1):
        nxt = pi @ m
        nxt /= nxt.sum()
        delta = float(np.max(np.abs(nxt - pi)))
        pi = nxt
        if delta < tol * 1e-3:
            break
    else:
        raise ChannelError("power iteration did not converge (periodic chain?)", residual=delta)

    residual = float(np.max(np.abs(pi @ m - pi)))
    if residual >= tol:
        raise ChannelError("stationary residual too large", residual=residual)
    logger.debug("Stationary distribution found in %d iterations", iteration)
    return pi


def draw_initial(rng: np.random.Generator, channel: GainMarkov) -> int:
    """Draw a gain index from the stationary distribution (one uniform)."""
    cdf = _row_cdf(gain_stationary(channel))
    return _inverse_cdf(cdf, rng.random())
