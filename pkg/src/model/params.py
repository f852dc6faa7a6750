"""System parameters, states and actions of the backscatter tag model."""

import math
from dataclasses import asdict, dataclass, field, replace
from enum import IntEnum
from typing import Iterator, NamedTuple, Optional

import numpy as np

from ..constants import ACTION_BACKSCATTER, ACTION_HARVEST, ACTION_NAMES, DEFAULT_GAMMA
from ..exceptions import ParameterError


class Action(IntEnum):
    """Operating mode chosen at the start of a slot."""

    HARVEST = ACTION_HARVEST
    BACKSCATTER = ACTION_BACKSCATTER

    @property
    def label(self) -> str:
        return ACTION_NAMES[int(self)]


class State(NamedTuple):
    """(battery units, channel-gain index) pair."""

    battery_units: int
    gain_index: int

    def index(self, n_gains: int) -> int:
        """Flat index ``battery_units * n_gains + gain_index``."""
        return self.battery_units * n_gains + self.gain_index


@dataclass(frozen=True)
class SystemParams:
    """Physical and economic constants of one tag/receiver configuration.

    Powers and noise variances are in watts, time in seconds, rates in
    bits/second, battery quantities in integer units of ``unit_energy``.
    ``e0 = None`` derives the unit from the gain spacing at the current
    source power (see ``physics.unit_energy``).

    Attributes:
        eta: Harvesting efficiency in (0, 1]
        p_t: RF source power
        t0: Slot duration
        r_b: Backscatter bit rate
        mu: Tag reflection coefficient in (0, 1]
        n_s: Receiver samples per bit
        delta0_sq: Receiver RF-circuit noise variance
        delta1_sq: Decoder noise variance
        h: Tag-to-receiver channel power gain
        gains: Channel power-gain levels G_0..G_Y, strictly increasing
        e0: Quantization unit in joules, or None to derive it
        b_c: Battery capacity in units
        j_cost: Circuit cost per slot in units
        k_cost: Backscatter cost in units
        gamma: Discount factor in (0, 1]
        backscatter_pays_j: Whether a backscatter slot also pays ``j_cost``
    """

    eta: float
    p_t: float
    t0: float
    r_b: float
    mu: float
    n_s: int
    delta0_sq: float
    delta1_sq: float
    h: float
    gains: tuple[float, ...]
    b_c: int
    j_cost: int
    k_cost: int
    e0: Optional[float] = None
    gamma: float = DEFAULT_GAMMA
    backscatter_pays_j: bool = True

    def __post_init__(self):
        object.__setattr__(self, "gains", tuple(float(g) for g in self.gains))
        self.validate()

    def validate(self) -> None:
        """Check every invariant; raises ParameterError naming the field."""
        for name in ("eta", "p_t", "t0", "r_b", "mu", "delta0_sq", "delta1_sq", "h", "gamma"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ParameterError(name, f"must be a finite number, got {value!r}")
        for name in ("eta", "mu", "gamma"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ParameterError(name, "must lie in (0, 1]")
        for name in ("p_t", "t0", "r_b", "delta0_sq", "delta1_sq", "h"):
            if getattr(self, name) <= 0:
                raise ParameterError(name, "must be > 0")
        if int(self.n_s) != self.n_s or self.n_s < 1:
            raise ParameterError("n_s", "must be a positive integer")
        if len(self.gains) < 2:
            raise ParameterError("gains", "needs at least two levels")
        if any(not math.isfinite(g) or g < 0 for g in self.gains):
            raise ParameterError("gains", "levels must be finite and >= 0")
        if any(b <= a for a, b in zip(self.gains, self.gains[1:])):
            raise ParameterError("gains", "levels must be strictly increasing")
        for name in ("b_c", "j_cost", "k_cost"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise ParameterError(name, "must be an integer")
        if not 1 <= self.j_cost < self.k_cost < self.b_c:
            raise ParameterError("k_cost", "requires 1 <= j_cost < k_cost < b_c")
        if self.e0 is not None and (not math.isfinite(self.e0) or self.e0 <= 0):
            raise ParameterError("e0", "must be > 0 or null")

    @property
    def n_gains(self) -> int:
        """Number of gain levels, Y + 1."""
        return len(self.gains)

    @property
    def n_states(self) -> int:
        return (self.b_c + 1) * self.n_gains

    @property
    def noise_power(self) -> float:
        return self.delta0_sq + self.delta1_sq

    def with_power(self, p_t: float) -> "SystemParams":
        """Same configuration at another source power.

        An explicit ``e0`` is rescaled with the power so battery units stay
        power-relative, as the derived unit is.
        """
        e0 = None if self.e0 is None else self.e0 * p_t / self.p_t
        return replace(self, p_t=float(p_t), e0=e0)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["gains"] = list(self.gains)
        return data


@dataclass(frozen=True)
class StateSpace:
    """Enumeration of the (B_c + 1) x (Y + 1) states of ``params``."""

    b_c: int
    n_gains: int
    battery: np.ndarray = field(init=False, repr=False, compare=False)
    gain: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        flat = np.arange(self.size)
        object.__setattr__(self, "battery", flat // self.n_gains)
        object.__setattr__(self, "gain", flat % self.n_gains)

    @classmethod
    def of(cls, params: SystemParams) -> "StateSpace":
        return cls(b_c=params.b_c, n_gains=params.n_gains)

    @property
    def size(self) -> int:
        return (self.b_c + 1) * self.n_gains

    def index(self, battery_units: int, gain_index: int) -> int:
        if not 0 <= battery_units <= self.b_c or not 0 <= gain_index < self.n_gains:
            raise ParameterError(
                "state", f"({battery_units}, {gain_index}) outside {self.b_c + 1}x{self.n_gains} grid"
            )
        return battery_units * self.n_gains + gain_index

    def decode(self, index: int) -> State:
        if not 0 <= index < self.size:
            raise ParameterError("state_index", f"{index} outside [0, {self.size})")
        return State(int(index // self.n_gains), int(index % self.n_gains))

    def __iter__(self) -> Iterator[State]:
        for i in range(self.size):
            yield self.decode(i)

    def __len__(self) -> int:
        return self.size
