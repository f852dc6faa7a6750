"""Custom exceptions for the backscatter mode-selection toolkit.

This module defines domain-specific exceptions that provide better error
messages and debugging information than generic Python exceptions.
"""

from typing import Optional


class BackscatterError(Exception):
    """Base exception for all toolkit errors.

    All custom exceptions in this module inherit from this base class,
    making it easy to catch all toolkit-related errors at the CLI boundary.
    """
    pass


class ConfigurationError(BackscatterError):
    """Raised when there's a configuration problem.

    This typically occurs when:
    - A config file contains an unknown section or key
    - A value cannot be parsed into the expected type
    - A command-line override names a key that does not exist

    Args:
        key: Dotted path of the offending key (e.g. "sim.n_slots")
        invariant: Human-readable description of the violated rule

    Example:
        >>> raise ConfigurationError("sim.n_slot", "unknown key")
        ConfigurationError: sim.n_slot: unknown key
    """

    def __init__(self, key: str, invariant: str):
        self.key = key
        self.invariant = invariant
        super().__init__(f"{key}: {invariant}")


class ParameterError(ConfigurationError):
    """Raised when a parameter value violates a model invariant.

    Example:
        >>> raise ParameterError("k_cost", "requires 1 <= j_cost < k_cost < b_c")
    """
    pass


class InfeasibleActionError(BackscatterError):
    """Raised when backscatter is requested without enough stored energy.

    The tag may backscatter only when its battery holds at least ``k_cost``
    units.

    Args:
        battery_units: Battery level at the time of the request
        k_cost: Backscatter-mode cost in units

    Example:
        >>> raise InfeasibleActionError(2, 3)
        InfeasibleActionError: Backscatter infeasible at battery 2 (needs >= 3 units)
    """

    def __init__(self, battery_units: int, k_cost: int):
        self.battery_units = battery_units
        self.k_cost = k_cost
        super().__init__(
            f"Backscatter infeasible at battery {battery_units} (needs >= {k_cost} units)"
        )


class ChannelError(BackscatterError):
    """Raised when a channel transition matrix is unusable.

    This covers rows that do not sum to one, negative entries, and chains
    whose stationary distribution cannot be found (reducible or periodic).

    Args:
        message: Description of the failure
        row: Offending row index, if any
        residual: Row-sum or fixed-point residual, if any
    """

    def __init__(self, message: str, row: Optional[int] = None, residual: Optional[float] = None):
        self.row = row
        self.residual = residual
        if row is not None:
            message = f"row {row}: {message}"
        if residual is not None:
            message += f" (residual {residual:.3e})"
        super().__init__(message)


class SolverError(BackscatterError):
    """Raised when an MDP computation cannot produce a trustworthy answer.

    Examples are an exhausted iteration budget, a state space too large for
    exhaustive enumeration, or a chain with several recurrent classes.

    Args:
        message: Description of the failure
        residual: Last sup-norm change or residual, if any
        iterations: Number of sweeps performed, if any
    """

    def __init__(self, message: str, residual: Optional[float] = None, iterations: Optional[int] = None):
        self.residual = residual
        self.iterations = iterations
        if iterations is not None:
            message += f" after {iterations} iterations"
        if residual is not None:
            message += f" (residual {residual:.3e})"
        super().__init__(message)


class AgentError(BackscatterError):
    """Raised for invalid learning inputs or diverging Q-values.

    Example:
        >>> raise AgentError("step index must be >= 1, got 0")
    """
    pass


class DetectorError(BackscatterError):
    """Raised when a detector Monte Carlo configuration is degenerate.

    Example:
        >>> raise DetectorError("n_s must be positive")
    """
    pass


class OutputError(BackscatterError):
    """Raised when a result file cannot be written.

    Args:
        path: File or directory that failed
        reason: Underlying OS error message
    """

    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"Cannot write {path}: {reason}")
