"""Per-slot link physics and battery dynamics of the backscatter tag.

All functions are pure: they depend only on their arguments and may be
called concurrently.
"""

import math

import numpy as np
from scipy import special

from ..exceptions import InfeasibleActionError, ParameterError
from .params import Action, State, SystemParams

_LN2 = math.log(2.0)


def _check_gain_index(gain_index: int, params: SystemParams) -> None:
    if not 0 <= gain_index < params.n_gains:
        raise ParameterError(
            "gain_index", f"{gain_index} outside [0, {params.n_gains - 1}]"
        )


def unit_energy(params: SystemParams) -> float:
    """Quantization unit e0 in joules.

    An explicit ``params.e0`` wins. Otherwise the unit is the energy
    harvested from one gain step above the zero-harvest floor G_0,
    ``eta * (G_1 - G_0) * P_t * T_0``; with G_0 = 0 this is
    ``eta * G_1 * P_t * T_0``.
    """
    if params.e0 is not None:
        return params.e0
    step = params.gains[1] - params.gains[0]
    return params.eta * step * params.p_t * params.t0


def harvested_units(gain_index: int, params: SystemParams) -> int:
    """Energy harvested in one slot at gain level ``gain_index``, in units.

    G_0 is the level at which the rectifier yields nothing; energy above it
    is quantized by ``unit_energy`` (round half up) and clamped to [0, Y].

    Example:
        >>> harvested_units(2, preset_params)
        2
    """
    _check_gain_index(gain_index, params)
    floor = params.gains[0]
    energy = params.eta * (params.gains[gain_index] - floor) * params.p_t * params.t0
    units = math.floor(energy / unit_energy(params) + 0.5)
    return int(min(max(units, 0), params.n_gains - 1))


def ber(gain_value: float, params: SystemParams) -> float:
    """Bit error rate of the energy detector at channel gain ``gain_value``.

    ``0.5 * erfc(mu^2 * P_t * g * h * sqrt(N_s) / (4 * (delta0^2 + delta1^2)))``
    """
    if not math.isfinite(gain_value) or gain_value < 0:
        raise ParameterError("gain_value", f"must be finite and >= 0, got {gain_value}")
    snr = (params.mu ** 2 * params.p_t * gain_value * params.h * math.sqrt(params.n_s)
           / (4.0 * params.noise_power))
    return 0.5 * float(special.erfc(snr))


def bsc_capacity(epsilon: float) -> float:
    """Capacity in bits per use of a binary symmetric channel.

    ``1 + e*log2(e) + (1-e)*log2(1-e)``, taking ``0*log2(0) = 0``.
    Only the symmetric region ``0 <= epsilon <= 0.5`` is accepted.
    """
    if not math.isfinite(epsilon) or not 0.0 <= epsilon <= 0.5:
        raise ParameterError("epsilon", f"must lie in [0, 0.5], got {epsilon}")
    entropy_bits = (special.entr(epsilon) + special.entr(1.0 - epsilon)) / _LN2
    return float(min(1.0, max(0.0, 1.0 - entropy_bits)))


def slot_rate(gain_index: int, params: SystemParams) -> float:
    """Bits delivered by one backscatter slot at gain level ``gain_index``."""
    _check_gain_index(gain_index, params)
    epsilon = ber(params.gains[gain_index], params)
    return params.r_b * bsc_capacity(epsilon) * params.t0


def feasible_actions(state: State, params: SystemParams) -> frozenset[Action]:
    """Actions available at ``state``: backscatter needs at least ``k_cost`` units."""
    if state.battery_units < params.k_cost:
        return frozenset({Action.HARVEST})
    return frozenset({Action.HARVEST, Action.BACKSCATTER})


def battery_next(units: int, action: Action, harvested: int, params: SystemParams) -> int:
    """Battery level after one slot, clamped to [0, B_c].

    Below ``k_cost`` the tag can only harvest and pays ``j_cost``. From
    ``k_cost`` upward it pays ``k_cost`` when backscattering, plus
    ``j_cost`` unless ``backscatter_pays_j`` is off, and ``j_cost`` when
    harvesting.

    Raises:
        InfeasibleActionError: Backscatter requested below ``k_cost``
    """
    if not 0 <= units <= params.b_c:
        raise ParameterError("units", f"{units} outside [0, {params.b_c}]")
    if harvested < 0:
        raise ParameterError("harvested", f"must be >= 0, got {harvested}")
    a = int(action)
    if units < params.k_cost:
        if a == Action.BACKSCATTER:
            raise InfeasibleActionError(units, params.k_cost)
        raw = units - params.j_cost + harvested
    elif params.backscatter_pays_j:
        raw = units - params.k_cost * a + (1 - a) * harvested - params.j_cost
    else:
        raw = units - (params.k_cost * a + params.j_cost * (1 - a)) + (1 - a) * harvested
    return int(min(params.b_c, max(0, raw)))


def harvest_table(params: SystemParams) -> np.ndarray:
    """``harvested_units`` for every gain index."""
    return np.array([harvested_units(i, params) for i in range(params.n_gains)], dtype=int)


def rate_table(params: SystemParams) -> np.ndarray:
    """``slot_rate`` for every gain index."""
    return np.array([slot_rate(i, params) for i in range(params.n_gains)], dtype=float)


def transition_table(params: SystemParams) -> np.ndarray:
    """Next battery level indexed by (battery, gain, action); -1 marks infeasible."""
    harvest = harvest_table(params)
    table = np.full((params.b_c + 1, params.n_gains, 2), -1, dtype=int)
    for b in range(params.b_c + 1):
        for g in range(params.n_gains):
            for action in feasible_actions(State(b, g), params):
                table[b, g, int(action)] = battery_next(b, action, int(harvest[g]), params)
    return table
