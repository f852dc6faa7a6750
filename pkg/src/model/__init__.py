"""System model package: parameters, link physics and battery dynamics."""

from .params import Action, State, StateSpace, SystemParams
from .physics import (
    battery_next,
    ber,
    bsc_capacity,
    feasible_actions,
    harvest_table,
    harvested_units,
    rate_table,
    slot_rate,
    transition_table,
    unit_energy,
)

__all__ = [
    "Action",
    "State",
    "StateSpace",
    "SystemParams",
    "battery_next",
    "ber",
    "bsc_capacity",
    "feasible_actions",
    "harvest_table",
    "harvested_units",
    "rate_table",
    "slot_rate",
    "transition_table",
    "unit_energy",
]
