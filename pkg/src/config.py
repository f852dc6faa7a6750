"""Run configuration: bundled preset, YAML files and command-line overrides.

A config file is a YAML mapping whose sections mirror the modules
(``system``, ``channel``, ``solver``, ``ql``, ``sim``, ``sweep``,
``detector``, ``battery_study``, ``output`` and, in manifests, ``run``).
Files are merged over a preset key by key, overrides are applied on top,
and the result is validated into a ``RunConfig``. See CONFIG_GUIDE.md.
"""

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Optional

import numpy as np
import yaml

from . import __version__
from .agents import QLConfig
from .channel import GainMarkov
from .constants import (
    AMBIENT_MODELS,
    GENERATOR_NAME,
    METHOD_VI,
    METHODS,
    MIN_DETECTOR_BITS,
    PRESET_DEFAULT,
    PRESETS,
    STREAM_SCHEME_VERSION,
)
from .exceptions import ChannelError, ConfigurationError, ParameterError
from .mdp import SolverConfig
from .model import SystemParams
from .simulation import SimConfig
from .utils import setup_logging

logger = setup_logging(__name__)

Coercer = Callable[[str, Any], Any]


def _float(key: str, value: Any) -> float:
    if isinstance(value, bool):
        raise ConfigurationError(key, f"must be a number, got {value!r}")
    try:
        result = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(key, f"must be a number, got {value!r}")
    if not math.isfinite(result):
        raise ConfigurationError(key, f"must be finite, got {value!r}")
    return result


def _int(key: str, value: Any) -> int:
    number = _float(key, value)
    if number != int(number):
        raise ConfigurationError(key, f"must be an integer, got {value!r}")
    return int(number)


def _bool(key: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise ConfigurationError(key, f"must be true or false, got {value!r}")
    return value


def _text(key: str, value: Any) -> str:
    if not isinstance(value, (str, int, float)) or isinstance(value, bool):
        raise ConfigurationError(key, f"must be a string, got {value!r}")
    return str(value)


def _optional(coerce: Coercer) -> Coercer:
    def wrapped(key: str, value: Any) -> Any:
        return None if value is None else coerce(key, value)
    return wrapped


def _float_list(key: str, value: Any) -> list[float]:
    if not isinstance(value, (list, tuple)):
        raise ConfigurationError(key, f"must be a list of numbers, got {value!r}")
    return [_float(f"{key}[{i}]", v) for i, v in enumerate(value)]


def _matrix(key: str, value: Any) -> list[list[float]]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigurationError(key, "must be a non-empty list of rows")
    return [_float_list(f"{key}[{i}]", row) for i, row in enumerate(value)]


def _method(key: str, value: Any) -> str:
    method = _text(key, value)
    if method not in METHODS:
        raise ConfigurationError(key, f"must be one of {', '.join(METHODS)}, got {method!r}")
    return method


def _methods(key: str, value: Any) -> list[str]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigurationError(key, "must be a non-empty list of methods")
    return [_method(f"{key}[{i}]", v) for i, v in enumerate(value)]


def _ambient(key: str, value: Any) -> str:
    model = _text(key, value)
    if model not in AMBIENT_MODELS:
        raise ConfigurationError(key, f"must be one of {', '.join(AMBIENT_MODELS)}, got {model!r}")
    return model


SCHEMA: dict[str, dict[str, Coercer]] = {
    "system": {
        "eta": _float, "p_t": _float, "t0": _float, "r_b": _float, "mu": _float,
        "n_s": _int, "delta0_sq": _float, "delta1_sq": _float, "h": _float,
        "gains": _float_list, "e0": _optional(_float), "b_c": _int, "j_cost": _int,
        "k_cost": _int, "gamma": _float, "backscatter_pays_j": _bool,
    },
    "channel": {"matrix": _matrix},
    "solver": {"gamma": _optional(_float), "theta": _float, "max_iterations": _int},
    "ql": {"alpha": _float, "eps0": _float, "max_steps": _int, "gamma": _optional(_float), "seed": _int},
    "sim": {
        "n_slots": _int, "window": _int, "e_initial": _int, "initial_gain": _optional(_int),
        "seed": _int, "curve_stride": _int,
    },
    "sweep": {"powers": _float_list, "methods": _methods, "workers": _int},
    "detector": {
        "bits": _int, "gain_values": _optional(_float_list), "ambient": _ambient,
        "tag_phase": _float, "chunk_samples": _int, "seed": _int,
    },
    "battery_study": {"h_values": _float_list, "methods": _methods},
    "run": {
        "command": _optional(_text), "method": _method, "generator": _text,
        "scheme_version": _int, "version": _optional(_text),
    },
}

RUN_DEFAULTS = {
    "command": None,
    "method": METHOD_VI,
    "generator": GENERATOR_NAME,
    "scheme_version": STREAM_SCHEME_VERSION,
    "version": __version__,
}


@dataclass(frozen=True)
class SweepSettings:
    powers: tuple[float, ...]
    methods: tuple[str, ...]
    workers: int = 1


@dataclass(frozen=True)
class DetectorSettings:
    """Detector-check settings; ``gain_values = None`` uses the model's gain levels."""

    bits: int
    gain_values: Optional[tuple[float, ...]]
    ambient: str
    tag_phase: float
    chunk_samples: int
    seed: int


@dataclass(frozen=True)
class StudySettings:
    h_values: tuple[float, ...]
    methods: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Fully validated configuration of one run.

    Attributes:
        system: Physical parameters
        channel: Gain transition model
        solver: Value-iteration settings
        ql: Q-learning settings
        sim: Evaluation horizon and seeds
        sweep: Power sweep settings
        detector: Detector-check settings
        battery_study: Occupancy study settings
        output: Output directory
        method: Policy used by ``simulate``
        command: Command recorded in a manifest, if any
    """

    system: SystemParams
    channel: GainMarkov
    solver: SolverConfig
    ql: QLConfig
    sim: SimConfig
    sweep: SweepSettings
    detector: DetectorSettings
    battery_study: StudySettings
    output: str
    method: str = METHOD_VI
    command: Optional[str] = None
    raw: dict = field(default_factory=dict, repr=False)

    def to_dict(self, command: Optional[str] = None) -> dict:
        """Plain mapping that ``load_config`` turns back into this config."""
        data = copy.deepcopy(self.raw)
        data["run"] = {
            **RUN_DEFAULTS,
            "command": command if command is not None else self.command,
            "method": self.method,
        }
        return data


def preset_dict(preset: str = PRESET_DEFAULT) -> dict:
    """Deep copy of a bundled preset."""
    try:
        return copy.deepcopy(PRESETS[preset])
    except KeyError:
        raise ConfigurationError("preset", f"unknown preset {preset!r}; known: {', '.join(PRESETS)}")


def merge_config(base: dict, update: Mapping[str, Any], source: str = "config") -> dict:
    """Merge ``update`` over ``base`` key by key, rejecting unknown sections and keys."""
    if not isinstance(update, Mapping):
        raise ConfigurationError(source, "top level must be a mapping")
    merged = copy.deepcopy(base)
    for section, values in update.items():
        if section == "output":
            merged["output"] = values
            continue
        if section not in SCHEMA:
            raise ConfigurationError(str(section), "unknown section")
        if not isinstance(values, Mapping):
            raise ConfigurationError(str(section), "must be a mapping")
        target = merged.setdefault(section, {})
        for key, value in values.items():
            if key not in SCHEMA[section]:
                raise ConfigurationError(f"{section}.{key}", "unknown key")
            target[key] = value
    return merged


def read_yaml(path: str | Path) -> dict:
    """Load a YAML config file (``safe_load``); an empty file is an empty mapping."""
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle)
    except OSError as e:
        raise ConfigurationError(str(path), f"cannot read config file: {e}")
    except yaml.YAMLError as e:
        raise ConfigurationError(str(path), f"invalid YAML: {e}")
    return data or {}


def parse_assignment(text: str) -> tuple[str, Any]:
    """Split ``section.key=value``; the value is parsed as YAML.

    Example:
        >>> parse_assignment("sim.n_slots=500")
        ('sim.n_slots', 500)
    """
    if "=" not in text:
        raise ConfigurationError(text, "override must look like section.key=value")
    key, value = text.split("=", 1)
    try:
        return key.strip(), yaml.safe_load(value)
    except yaml.YAMLError as e:
        raise ConfigurationError(key.strip(), f"cannot parse value {value!r}: {e}")


def apply_overrides(raw: dict, overrides: Mapping[str, Any]) -> dict:
    """Set dotted ``section.key`` entries (or ``output``) on a copy of ``raw``."""
    updated = copy.deepcopy(raw)
    for dotted, value in overrides.items():
        if dotted == "output":
            updated["output"] = value
            continue
        section, _, key = dotted.partition(".")
        if section not in SCHEMA:
            raise ConfigurationError(dotted, "unknown section")
        if key not in SCHEMA[section]:
            raise ConfigurationError(dotted, "unknown key")
        updated.setdefault(section, {})[key] = value
        logger.debug("Override %s = %r", dotted, value)
    return updated


def _coerce_sections(raw: dict) -> dict:
    resolved: dict[str, Any] = {}
    for section, coercers in SCHEMA.items():
        values = dict(RUN_DEFAULTS) if section == "run" else {}
        values.update(raw.get(section, {}) or {})
        missing = [k for k in coercers if k not in values]
        if missing and section != "run":
            raise ConfigurationError(f"{section}.{missing[0]}", "missing key")
        resolved[section] = {k: coercers[k](f"{section}.{k}", v) for k, v in values.items()}
    output = raw.get("output")
    if not output:
        raise ConfigurationError("output", "must name an output directory")
    resolved["output"] = _text("output", output)
    return resolved


def _check(condition: bool, key: str, invariant: str) -> None:
    if not condition:
        raise ConfigurationError(key, invariant)


def _discount(value: Optional[float], system_gamma: float, key: str) -> float:
    """Solver or agent discount; ``None`` inherits ``system.gamma``."""
    if value is None:
        _check(0.0 < system_gamma < 1.0, "system.gamma",
               f"must lie in (0, 1) while {key} inherits it")
        return system_gamma
    _check(0.0 < value < 1.0, key, "must lie in (0, 1)")
    return value


def build_run_config(raw: dict) -> RunConfig:
    """Validate a merged mapping into a RunConfig.

    Raises:
        ConfigurationError: Any key failing its type or module invariant;
            the message names ``section.key``
    """
    cfg = _coerce_sections(raw)

    try:
        system = SystemParams(**cfg["system"])
    except ParameterError as e:
        key = e.key if "." in e.key else f"system.{e.key}"
        raise ParameterError(key, e.invariant)
    try:
        channel = GainMarkov(np.array(cfg["channel"]["matrix"], dtype=float))
    except (ChannelError, ValueError) as e:
        raise ConfigurationError("channel.matrix", str(e))
    _check(channel.n_gains == system.n_gains, "channel.matrix",
           f"must be {system.n_gains}x{system.n_gains} to match system.gains")

    solver = dict(cfg["solver"], gamma=_discount(cfg["solver"]["gamma"], system.gamma, "solver.gamma"))
    _check(solver["theta"] > 0, "solver.theta", "must be > 0")
    _check(solver["max_iterations"] >= 1, "solver.max_iterations", "must be >= 1")

    ql = dict(cfg["ql"], gamma=_discount(cfg["ql"]["gamma"], system.gamma, "ql.gamma"))
    _check(ql["max_steps"] >= 1, "ql.max_steps", "must be >= 1")

    sim = cfg["sim"]
    _check(0 <= sim["e_initial"] <= system.b_c, "sim.e_initial", f"must lie in [0, {system.b_c}]")
    if sim["initial_gain"] is not None:
        _check(0 <= sim["initial_gain"] < system.n_gains, "sim.initial_gain",
               f"must lie in [0, {system.n_gains - 1}] or be null")

    sweep = cfg["sweep"]
    _check(len(sweep["powers"]) > 0 and all(p > 0 for p in sweep["powers"]),
           "sweep.powers", "must be a non-empty list of positive powers")
    _check(sweep["workers"] >= 1, "sweep.workers", "must be >= 1")

    det = cfg["detector"]
    _check(det["bits"] >= MIN_DETECTOR_BITS, "detector.bits", f"must be >= {MIN_DETECTOR_BITS}")
    _check(det["chunk_samples"] >= 1, "detector.chunk_samples", "must be >= 1")
    _check(det["seed"] >= 0, "detector.seed", "must be non-negative")
    if det["gain_values"] is not None:
        _check(len(det["gain_values"]) > 0 and all(g >= 0 for g in det["gain_values"]),
               "detector.gain_values", "must be a non-empty list of gains >= 0 or null")

    study = cfg["battery_study"]
    _check(len(study["h_values"]) > 0 and all(h > 0 for h in study["h_values"]),
           "battery_study.h_values", "must be a non-empty list of positive gains")

    run = cfg["run"]
    _check(run["generator"] == GENERATOR_NAME, "run.generator",
           f"manifest was written with {run['generator']}, this build uses {GENERATOR_NAME}")
    _check(run["scheme_version"] == STREAM_SCHEME_VERSION, "run.scheme_version",
           f"manifest uses stream scheme {run['scheme_version']}, this build uses {STREAM_SCHEME_VERSION}")

    resolved_raw = {section: cfg[section] for section in SCHEMA if section != "run"}
    resolved_raw["system"] = system.to_dict()
    resolved_raw["output"] = cfg["output"]
    return RunConfig(
        system=system,
        channel=channel,
        solver=SolverConfig(**solver),
        ql=QLConfig(**ql),
        sim=SimConfig(**sim),
        sweep=SweepSettings(tuple(sweep["powers"]), tuple(sweep["methods"]), sweep["workers"]),
        detector=DetectorSettings(
            bits=det["bits"],
            gain_values=None if det["gain_values"] is None else tuple(det["gain_values"]),
            ambient=det["ambient"],
            tag_phase=det["tag_phase"],
            chunk_samples=det["chunk_samples"],
            seed=det["seed"],
        ),
        battery_study=StudySettings(tuple(study["h_values"]), tuple(study["methods"])),
        output=cfg["output"],
        method=run["method"],
        command=run["command"],
        raw=resolved_raw,
    )


def load_config(path: Optional[str | Path] = None, preset: str = PRESET_DEFAULT,
                overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Preset, then file, then overrides, then validation.

    Example:
        >>> config = load_config(overrides={"system.p_t": 2.5})
        >>> config.system.p_t
        2.5
    """
    raw = preset_dict(preset)
    if path is not None:
        raw = merge_config(raw, read_yaml(path), source=str(path))
        logger.info("Loaded config file %s over preset %s", path, preset)
    if overrides:
        raw = apply_overrides(raw, overrides)
    return build_run_config(raw)


def dump_config(data: dict) -> str:
    """YAML text of a config mapping, in section order."""
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)
