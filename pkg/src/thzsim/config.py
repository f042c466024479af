"""Run configuration: sectioned ``key = value`` text with ``#`` comments.

Every field has a default except ``run.protocol``. Printing a config and
parsing it back yields an equal object (floats are written with ``repr``).
"""

import dataclasses
from dataclasses import dataclass, field, fields, replace
from typing import Optional

from .channel import RadioParams
from .mac import MacParams
from .routing import MODES
from .scenario import DEFAULT_MACHINES, PLANT_DIMS, ConfigurationError, build_plant

MOBILITY = ("static", "dynamic")


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class ScenarioConfig:
    plant_dims: tuple = PLANT_DIMS
    machines: tuple = DEFAULT_MACHINES
    n_ues: int = 4
    mobility: str = "static"
    t_move_s: Optional[float] = None  # None: a tenth of the simulation time
    p_move: float = 0.5
    relay_reachable: bool = True


@dataclass(frozen=True)
class RunConfig:
    protocol: str
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    radio: RadioParams = field(default_factory=RadioParams)
    mac: MacParams = field(default_factory=MacParams)
    seed_base: int = 1
    runs: int = 20
    sim_time_s: float = 0.5e-3

    def seeds(self):
        return [self.seed_base + k for k in range(self.runs)]

    def with_(self, **changes):
        """Copy with changes; ``n_ues``/``mobility``/... and MAC fields are routed to their block."""
        sc = {k: changes.pop(k) for k in list(changes) if k in _SCENARIO_KEYS}
        mac = {k: changes.pop(k) for k in list(changes) if k in _MAC_KEYS}
        cfg = replace(self, **changes)
        if sc:
            cfg = replace(cfg, scenario=replace(cfg.scenario, **sc))
        if mac:
            cfg = replace(cfg, mac=replace(cfg.mac, **mac))
        validate(cfg)
        return cfg


_SCENARIO_KEYS = {f.name for f in fields(ScenarioConfig)}
_MAC_KEYS = {f.name for f in fields(MacParams)}
_RUN_KEYS = ("protocol", "seed_base", "runs", "sim_time_s")
_SECTIONS = ("scenario", "radio", "mac", "run")


def _fmt(value):
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple) and value and isinstance(value[0], tuple):
        return ", ".join(f"{_fmt(float(x))}:{_fmt(float(y))}:{_fmt(float(s))}"
                         for (x, y), s in value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(float(v)) for v in value)
    return str(value)


def format_config(cfg):
    out = []
    for name, block in (("scenario", cfg.scenario), ("radio", cfg.radio), ("mac", cfg.mac)):
        out.append(f"[{name}]")
        for f in fields(block):
            out.append(f"{f.name} = {_fmt(getattr(block, f.name))}")
        out.append("")
    out.append("[run]")
    for k in _RUN_KEYS:
        out.append(f"{k} = {_fmt(getattr(cfg, k))}")
    return "\n".join(out) + "\n"


def _convert(name, default, raw, line):
    try:
        if name == "machines":
            layout = []
            for item in raw.split(","):
                x, y, s = (float(t) for t in item.strip().split(":"))
                layout.append(((x, y), s))
            return tuple(layout)
        if name == "plant_dims":
            dims = tuple(float(t) for t in raw.split(","))
            if len(dims) != 3:
                raise ValueError("expected three comma-separated numbers")
            return dims
        if name == "t_move_s":
            return None if raw == "auto" else float(raw)
        if isinstance(default, bool):
            if raw.lower() not in ("true", "false"):
                raise ValueError("expected true or false")
            return raw.lower() == "true"
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name!r}: {raw!r} ({exc})", line) from None


def _defaults():
    return {
        "scenario": {f.name: f.default for f in fields(ScenarioConfig)},
        "radio": {f.name: f.default for f in fields(RadioParams)},
        "mac": {f.name: f.default for f in fields(MacParams)},
        "run": {"protocol": None, "seed_base": 1, "runs": 20, "sim_time_s": 0.5e-3},
    }


def parse_config(text):
    values = _defaults()
    seen_line = {}
    section = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                raise ConfigError(f"unknown section [{section}]", lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw_line.strip()!r}", lineno)
        if section is None:
            raise ConfigError("key outside of a section", lineno)
        key, raw = (t.strip() for t in line.split("=", 1))
        if key not in values[section]:
            raise ConfigError(f"unknown key {section}.{key}", lineno)
        if raw == "":
            raise ConfigError(f"empty value for {section}.{key}", lineno)
        values[section][key] = _convert(key, values[section][key] if key != "protocol" else "",
                                        raw, lineno)
        seen_line[(section, key)] = lineno

    if values["run"]["protocol"] is None:
        raise ConfigError("missing mandatory key run.protocol")
    try:
        cfg = RunConfig(
            protocol=values["run"]["protocol"],
            scenario=ScenarioConfig(**values["scenario"]),
            radio=RadioParams(**values["radio"]),
            mac=MacParams(**values["mac"]),
            seed_base=values["run"]["seed_base"],
            runs=values["run"]["runs"],
            sim_time_s=values["run"]["sim_time_s"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    validate(cfg, seen_line)
    return cfg


def validate(cfg, lines=None):
    lines = lines or {}

    def fail(section, key, msg):
        raise ConfigError(f"{section}.{key}: {msg}", lines.get((section, key)))

    if cfg.protocol not in MODES:
        fail("run", "protocol", f"unknown protocol {cfg.protocol!r}, expected one of {MODES}")
    if cfg.runs < 1:
        fail("run", "runs", "must be >= 1")
    if not cfg.sim_time_s > 0:
        fail("run", "sim_time_s", "must be positive")
    sc = cfg.scenario
    if sc.n_ues < 2 or sc.n_ues % 2:
        fail("scenario", "n_ues", f"must be even and >= 2, got {sc.n_ues}")
    if sc.mobility not in MOBILITY:
        fail("scenario", "mobility", f"expected one of {MOBILITY}, got {sc.mobility!r}")
    if not 0.0 <= sc.p_move <= 1.0:
        fail("scenario", "p_move", "must lie in [0, 1]")
    if sc.t_move_s is not None and not sc.t_move_s > 0:
        fail("scenario", "t_move_s", "must be positive")
    if any(d <= 0 for d in sc.plant_dims):
        fail("scenario", "plant_dims", "dimensions must be positive")
    try:
        build_plant(sc.machines, sc.plant_dims)
    except ConfigurationError as exc:
        fail("scenario", "machines", str(exc))
    return cfg


def config_dict(cfg):
    return dataclasses.asdict(cfg)
