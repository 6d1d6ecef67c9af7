"""Run configuration: sectioned INI or JSON files with unit-tagged values.

Every key is optional. Values may carry a unit after the number, for example
``w_f = 3 um``, ``n0 = 2e14 cm^-3``, ``tau = 27 ns`` or ``omega_40 = 0.9 MHz``.
Frequencies given in Hz-type units are cyclic and are converted to rad/s;
rates (``s^-1``) are not.
"""

from __future__ import annotations

import configparser
import json
import math
import re
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

from .errors import ConfigError
from .geometry import CONVENTIONS, TrapConfig, per_cm3, to_cm3
from .readout import DetectionConfig
from .dynamics import PulseConfig
from .protocol import DEFAULT_GATE_ERROR, DEFAULT_T_LOSS, DDD_DEFAULT, GATE_MODELS, GateSpec

_TWO_PI = 2.0 * math.pi

# unit -> multiplier into the internal unit of each kind
UNITS: dict[str, dict[str, float]] = {
    "length": {"um": 1.0, "μm": 1.0, "micron": 1.0, "nm": 1e-3, "mm": 1e3, "m": 1e6},
    "density": {"cm^-3": 1.0, "cm-3": 1.0, "/cm^3": 1.0, "um^-3": 1e12, "μm^-3": 1e12,
                "m^-3": 1e-6},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "μs": 1e-6, "ns": 1e-9},
    "angular": {"rad/s": 1.0, "Hz": _TWO_PI, "kHz": _TWO_PI * 1e3, "MHz": _TWO_PI * 1e6,
                "GHz": _TWO_PI * 1e9},
    "rate": {"s^-1": 1.0, "1/s": 1.0, "Hz": 1.0, "/s": 1.0, "kHz": 1e3},
    "none": {"": 1.0},
}

# default unit applied to a bare number
DEFAULT_UNIT = {"length": "um", "density": "cm^-3", "time": "s", "angular": "rad/s",
                "rate": "s^-1", "none": ""}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


def parse_quantity(text: Any, kind: str, where: str = "") -> float:
    if isinstance(text, bool):
        raise ConfigError(f"{where}: expected a number, got {text!r}")
    if isinstance(text, (int, float)):
        return float(text)
    m = _NUMBER.match(str(text))
    if not m:
        raise ConfigError(f"{where}: cannot parse {text!r} as a number")
    value, unit = float(m.group(1)), m.group(2) or DEFAULT_UNIT[kind]
    table = UNITS[kind]
    if unit not in table:
        allowed = ", ".join(u for u in table if u) or "none"
        raise ConfigError(f"{where}: unit {unit!r} not accepted (allowed: {allowed})")
    return value * table[unit]


def _bool(text: Any, where: str) -> bool:
    if isinstance(text, bool):
        return text
    s = str(text).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {text!r}")


def _int(text: Any, where: str) -> int:
    v = parse_quantity(text, "none", where)
    if v != int(v):
        raise ConfigError(f"{where}: expected an integer, got {text!r}")
    return int(v)


def _choice(options) -> Callable[[Any, str], str]:
    def parse(text, where):
        s = str(text).strip()
        if s not in options:
            raise ConfigError(f"{where}: expected one of {sorted(options)}, got {text!r}")
        return s
    return parse


def _int_list(text: Any, where: str) -> list[int]:
    items = text if isinstance(text, list) else [t for t in str(text).split(",") if t.strip()]
    return [_int(t, where) for t in items]


def _q(kind):
    return lambda text, where: parse_quantity(text, kind, where)


# section -> key -> parser
SCHEMA: dict[str, dict[str, Callable[[Any, str], Any]]] = {
    "trap": {"w_f": _q("length"), "lambda_f": _q("length"), "T_rel": _q("none"),
             "n0": _q("density"), "wavelength": _q("length"),
             "convention": _choice(CONVENTIONS)},
    "detection": {"eta": _q("none"), "omega_d_frac": _q("none"), "tau": _q("time"),
                  "background_rate": _q("rate"), "t1": _q("time")},
    "pulse": {"tau": _q("time"), "delta_over_gamma": _q("none"), "omega_40": _q("angular"),
              "t_R": _q("time"), "N": _q("none"), "envelope": _choice({"exponential", "flat"}),
              "hermitian": _bool},
    "gate": {"epsilon": _q("none"), "rabi": _q("angular"), "N": _q("none"),
             "ddd_avg": _q("angular"), "model": _choice(GATE_MODELS)},
    "channel": {"t_loss": _q("time"), "t2": _q("time"), "cnot_time": _q("time"),
                "p_c": _q("none"), "p_1": _q("none"), "transfer_fidelity": _q("none")},
    "sweep": {"n_min": _q("density"), "n_max": _q("density"), "n_points": _int, "log": _bool,
              "delta_min": _q("none"), "delta_max": _q("none"), "delta_points": _int,
              "n_list": _int_list, "n_seeds": _int, "target_error": _q("none")},
}


@dataclass(frozen=True)
class PulseSettings:
    tau: float = 27e-9
    delta_over_gamma: float = 20.0
    omega_40: float = _TWO_PI * 0.9e6
    t_R: float | None = None
    N: float = 1000.0
    envelope: str = "exponential"
    hermitian: bool = False

    def build(self, delta_over_gamma: float | None = None) -> PulseConfig:
        gamma = 1.0 / self.tau
        d = self.delta_over_gamma if delta_over_gamma is None else delta_over_gamma
        return PulseConfig(gamma=gamma, delta=d * gamma, omega_40=self.omega_40, t_R=self.t_R,
                           N=self.N, envelope=self.envelope, hermitian=self.hermitian)


@dataclass(frozen=True)
class GateSettings:
    epsilon: float | None = DEFAULT_GATE_ERROR
    rabi: float | None = None
    N: float = 1.0
    ddd_avg: float = DDD_DEFAULT
    model: str = "depolarizing"

    def build(self) -> GateSpec:
        if self.rabi is not None:
            return GateSpec(self.rabi, self.N, self.ddd_avg, self.model)
        return GateSpec.for_error(self.epsilon, self.N, self.ddd_avg, self.model)


@dataclass(frozen=True)
class ChannelSettings:
    t_loss: float = DEFAULT_T_LOSS
    t2: float | None = None
    cnot_time: float = 33e-9
    p_c: float | None = None
    p_1: float | None = None
    transfer_fidelity: float | None = None


@dataclass(frozen=True)
class SweepSettings:
    n_min: float = 1e13  # cm^-3
    n_max: float = 2e14
    n_points: int = 20
    log: bool = False
    delta_min: float = 1.0
    delta_max: float = 100.0
    delta_points: int = 40
    n_list: tuple[int, ...] = (100, 200, 500, 1000, 2000)
    n_seeds: int = 8
    target_error: float = 1e-4


@dataclass(frozen=True)
class RunConfig:
    trap: TrapConfig = field(default_factory=TrapConfig)
    convention: str | None = None
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    pulse: PulseSettings = field(default_factory=PulseSettings)
    gate: GateSettings = field(default_factory=GateSettings)
    channel: ChannelSettings = field(default_factory=ChannelSettings)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    preset: str = "fig3"

    def trap_for(self, default_convention: str) -> TrapConfig:
        """Trap with the configured convention, or ``default_convention`` if unset."""
        return self.trap.with_convention(self.convention or default_convention)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trap"]["n0_cm3"] = to_cm3(d["trap"].pop("n0"))
        d["sweep"]["n_list"] = list(d["sweep"]["n_list"])
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


PRESETS: dict[str, dict[str, dict[str, Any]]] = {
    "fig3": {},
    "fig6": {"trap": {"w_f": 8.0, "n0": 5e14}, "sweep": {"n_min": 1e13, "n_max": 5e14}},
}


def _apply(cfg: RunConfig, sections: dict[str, dict[str, Any]], source: str) -> RunConfig:
    """Overlay parsed ``{section: {key: raw}}`` onto ``cfg``."""
    for section, items in sections.items():
        if section not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{section}] "
                              f"(allowed: {', '.join(SCHEMA)})")
        parsed = {}
        for key, raw in items.items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}] "
                                  f"(allowed: {', '.join(SCHEMA[section])})")
            parsed[key] = SCHEMA[section][key](raw, f"{source}: [{section}] {key}")
        try:
            cfg = _overlay(cfg, section, parsed)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{source}: [{section}] {exc}") from exc
    return cfg


def _overlay(cfg: RunConfig, section: str, parsed: dict[str, Any]) -> RunConfig:
    if section == "trap":
        conv = parsed.pop("convention", None)
        if "n0" in parsed:
            parsed["n0"] = per_cm3(parsed["n0"])
        cfg = replace(cfg, trap=replace(cfg.trap, **parsed))
        return replace(cfg, convention=conv) if conv else cfg
    if section == "gate":
        if "epsilon" in parsed and "rabi" in parsed:
            raise ConfigError("[gate] give either epsilon or rabi, not both")
        if "rabi" in parsed:
            parsed["epsilon"] = None
        elif "epsilon" in parsed:
            parsed["rabi"] = None
        gate = replace(cfg.gate, **parsed)
        gate.build()  # validates the error guard
        return replace(cfg, gate=gate)
    if section == "sweep" and "n_list" in parsed:
        parsed["n_list"] = tuple(parsed["n_list"])
    current = getattr(cfg, section)
    new = replace(current, **parsed)
    if section == "pulse":
        new.build()
    return replace(cfg, **{section: new})


def preset_config(name: str = "fig3") -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r} (allowed: {', '.join(PRESETS)})")
    return replace(_apply(RunConfig(), PRESETS[name], f"preset {name}"), preset=name)


def _read_ini(path: Path) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser(interpolation=None, strict=True)
    parser.optionxform = str  # keep key case (T_rel, N)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if parser.defaults():
        raise ConfigError(f"{path}: keys outside a section are not allowed")
    return {s: dict(parser.items(s)) for s in parser.sections()}


def _read_json(path: Path) -> dict[str, dict[str, Any]]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict) or not all(isinstance(v, dict) for v in data.values()):
        raise ConfigError(f"{path}: expected an object of sections")
    return data


def load_config(path: str | Path | None = None, fmt: str | None = None,
                preset: str = "fig3") -> RunConfig:
    """Preset defaults overlaid with the file at ``path`` (if given)."""
    cfg = preset_config(preset)
    if path is None:
        return cfg
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    if fmt is None:
        fmt = "json" if path.suffix.lower() == ".json" else "ini"
    if fmt not in ("ini", "json"):
        raise ConfigError(f"unknown config format {fmt!r}")
    sections = _read_ini(path) if fmt == "ini" else _read_json(path)
    return _apply(cfg, sections, str(path))
