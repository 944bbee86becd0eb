"""Run configuration: a strict TOML schema mirroring the domain types.

The file has five tables; every key is optional and defaults to the values
shown in ``config.example.toml`` at the repository root.  Unknown keys are
rejected by name rather than ignored, so typos cannot silently fall back to
defaults.  ``dump_toml`` emits the complete effective configuration, and the
emitted text re-parses to an equal RunConfig (floats are rendered with
``repr``, which TOML round-trips exactly).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import tomli

from .coupler import DEFAULT_COUPLING, CouplerModel, WavelengthBand
from .errors import ConfigError, DomainError
from .session import AttackConfig
from .units import ProtocolParams

_FORMATS = ("csv", "json-lines")


@dataclass(frozen=True)
class SimulationConfig:
    n_rounds: int = 100_000
    seed: int = 42

    def __post_init__(self):
        if self.n_rounds < 1:
            raise ConfigError(f"n_rounds must be >= 1, got {self.n_rounds}", key="simulation.n_rounds")
        if not (0 <= self.seed < 2**64):
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed}", key="simulation.seed")


@dataclass(frozen=True)
class OutputConfig:
    path: str = "dataset.csv"
    format: str = "csv"

    def __post_init__(self):
        if self.format not in _FORMATS:
            raise ConfigError(
                f"unknown output format {self.format!r}; expected one of {_FORMATS}",
                key="output.format",
            )


@dataclass(frozen=True)
class RunConfig:
    protocol: ProtocolParams = field(default_factory=ProtocolParams)
    coupler: CouplerModel = field(default_factory=CouplerModel)
    band: WavelengthBand = field(default_factory=WavelengthBand)
    attack: AttackConfig = field(default_factory=AttackConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


def _take(table: dict, section: str, key: str, kind, default):
    if key not in table:
        return default
    value = table.pop(key)
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(f"{section}.{key} must be an integer, got {value!r}", key=f"{section}.{key}")
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ConfigError(
            f"{section}.{key} must be of type {kind.__name__}, got {value!r}",
            key=f"{section}.{key}",
        )
    return value


def _reject_unknown(table: dict, section: str):
    if table:
        key = sorted(table)[0]
        dotted = f"{section}.{key}" if section else key
        raise ConfigError(f"unknown key {dotted!r}", key=dotted)


def config_from_dict(data: dict) -> RunConfig:
    """Build a RunConfig from parsed TOML, rejecting unknown keys by name."""
    data = {k: dict(v) if isinstance(v, dict) else v for k, v in dict(data).items()}

    proto = data.pop("protocol", {})
    if not isinstance(proto, dict):
        raise ConfigError("protocol must be a table", key="protocol")
    try:
        protocol = ProtocolParams(
            v_a=_take(proto, "protocol", "v_a", float, 10.0),
            eta=_take(proto, "protocol", "eta", float, 0.6),
            lo_intensity=_take(proto, "protocol", "lo_intensity", float, 1e8),
            epsilon=_take(proto, "protocol", "epsilon", float, 0.01),
        )
    except DomainError as exc:
        raise ConfigError(f"protocol: {exc}", key="protocol") from exc
    _reject_unknown(proto, "protocol")

    coup = data.pop("coupler", {})
    if not isinstance(coup, dict):
        raise ConfigError("coupler must be a table", key="coupler")
    try:
        coupler = CouplerModel(
            f=_take(coup, "coupler", "f", float, 1.0),
            c=_take(coup, "coupler", "c", float, DEFAULT_COUPLING),
            w=_take(coup, "coupler", "w", float, 1.0),
        )
        band = WavelengthBand(
            lambda_min=_take(coup, "coupler", "lambda_min", float, 1.2),
            lambda_max=_take(coup, "coupler", "lambda_max", float, 1.9),
        )
    except DomainError as exc:
        raise ConfigError(f"coupler: {exc}", key="coupler") from exc
    _reject_unknown(coup, "coupler")

    atk = data.pop("attack", {})
    if not isinstance(atk, dict):
        raise ConfigError("attack must be a table", key="attack")
    attack = AttackConfig(
        t2_policy=_take(atk, "attack", "t2_policy", str, "hiding"),
        t2=_take(atk, "attack", "t2", float, None),
        forged_lo_intensity=_take(atk, "attack", "forged_lo_intensity", float, None),
    )
    _reject_unknown(atk, "attack")

    sim = data.pop("simulation", {})
    if not isinstance(sim, dict):
        raise ConfigError("simulation must be a table", key="simulation")
    simulation = SimulationConfig(
        n_rounds=_take(sim, "simulation", "n_rounds", int, 100_000),
        seed=_take(sim, "simulation", "seed", int, 42),
    )
    _reject_unknown(sim, "simulation")

    out = data.pop("output", {})
    if not isinstance(out, dict):
        raise ConfigError("output must be a table", key="output")
    output = OutputConfig(
        path=_take(out, "output", "path", str, "dataset.csv"),
        format=_take(out, "output", "format", str, "csv"),
    )
    _reject_unknown(out, "output")

    _reject_unknown(data, "")
    return RunConfig(
        protocol=protocol,
        coupler=coupler,
        band=band,
        attack=attack,
        simulation=simulation,
        output=output,
    )


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data)


def _render(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ConfigError(f"cannot render non-finite value {value}")
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    raise ConfigError(f"cannot render config value {value!r}")


def dump_toml(config: RunConfig) -> str:
    """Effective configuration as TOML; omitted optionals stay omitted."""
    attack_items = [("t2_policy", config.attack.t2_policy)]
    if config.attack.t2 is not None:
        attack_items.append(("t2", config.attack.t2))
    if config.attack.forged_lo_intensity is not None:
        attack_items.append(("forged_lo_intensity", config.attack.forged_lo_intensity))
    sections = [
        (
            "protocol",
            [
                ("v_a", config.protocol.v_a),
                ("eta", config.protocol.eta),
                ("lo_intensity", config.protocol.lo_intensity),
                ("epsilon", config.protocol.epsilon),
            ],
        ),
        (
            "coupler",
            [
                ("f", config.coupler.f),
                ("c", config.coupler.c),
                ("w", config.coupler.w),
                ("lambda_min", config.band.lambda_min),
                ("lambda_max", config.band.lambda_max),
            ],
        ),
        ("attack", attack_items),
        (
            "simulation",
            [("n_rounds", config.simulation.n_rounds), ("seed", config.simulation.seed)],
        ),
        ("output", [("path", config.output.path), ("format", config.output.format)]),
    ]
    lines = []
    for name, items in sections:
        lines.append(f"[{name}]")
        lines.extend(f"{key} = {_render(value)}" for key, value in items)
        lines.append("")
    return "\n".join(lines)
