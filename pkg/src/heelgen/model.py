"""Domain types, reference defaults, and config-file handling.

All quantities are SI: kg, N/m, N*s/m, m, ohm, H, A*m^2, F, V, C, s.
Config files are TOML with the dotted-key schema documented in the README
(groups ``design.*``, ``gait.*``, ``circuit.*``, ``sim.*``, ``optimize.*``).
Every type validates on construction; no partially valid value escapes.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

MU0 = 4.0e-7 * math.pi  # vacuum permeability, H/m

GAIT_SHAPES = ("half_sine", "trapezoid")
DIODE_KINDS = ("constant_drop", "shockley")
LOAD_KINDS = ("resistor", "battery", "open")


class ConfigError(ValueError):
    """Raised for malformed config files and invariant violations.

    The message always names the offending dotted key and the constraint.
    """


def _check(cond: bool, key: str, constraint: str):
    if not cond:
        raise ConfigError(f"{key}: {constraint}")


@dataclass(frozen=True)
class HarvesterDesign:
    """Mechanical/magnetic/coil parameters of one generator instance."""

    moving_mass: float = 0.02        # kg, magnet + carrier
    spring_k: float = 2000.0         # N/m
    mech_damping: float = 2.0        # N*s/m, viscous
    stroke_limit: float = 0.005      # m, max |displacement| from equilibrium
    coil_turns: int = 1000
    coil_radius: float = 0.008       # m, mean turn radius
    coil_resistance: float = 50.0    # ohm
    coil_inductance: float = 0.0     # H, zero allowed
    magnet_moment: float = 0.1       # A*m^2, moving magnet dipole moment
    end_magnet_moment: float = 0.0   # A*m^2 per fixed latch magnet, 0 disables
    end_gap: float = 0.008           # m, equilibrium to each fixed magnet

    def __post_init__(self):
        _check(self.moving_mass > 0, "design.moving_mass", "must be strictly positive")
        _check(self.spring_k > 0, "design.spring_k", "must be strictly positive")
        _check(self.mech_damping >= 0, "design.mech_damping", "must be nonnegative")
        _check(self.stroke_limit > 0, "design.stroke_limit", "must be strictly positive")
        _check(self.coil_turns > 0, "design.coil_turns", "must be strictly positive")
        _check(self.coil_radius > 0, "design.coil_radius", "must be strictly positive")
        _check(self.coil_resistance > 0, "design.coil_resistance", "must be strictly positive")
        _check(self.coil_inductance >= 0, "design.coil_inductance", "must be nonnegative")
        _check(self.magnet_moment >= 0, "design.magnet_moment", "must be nonnegative")
        _check(self.end_magnet_moment >= 0, "design.end_magnet_moment", "must be nonnegative")
        _check(self.end_gap > 0, "design.end_gap", "must be strictly positive")
        _check(self.stroke_limit < self.end_gap,
               "design.stroke_limit", "must be smaller than design.end_gap")


@dataclass(frozen=True)
class GaitProfile:
    """Parametric heel-strike force waveform."""

    cadence: float = 1.0          # steps/s
    peak_force: float = 700.0     # N, heel peak force
    duty: float = 0.1             # loaded fraction of the period, (0, 1)
    shape: str = "half_sine"      # half_sine | trapezoid
    force_fraction: float = 0.02  # fraction of heel force reaching the spring

    def __post_init__(self):
        _check(self.cadence > 0, "gait.cadence", "must be strictly positive")
        _check(self.peak_force >= 0, "gait.peak_force", "must be nonnegative")
        _check(0 < self.duty < 1, "gait.duty", "must lie in (0, 1)")
        _check(self.shape in GAIT_SHAPES,
               "gait.shape", f"must be one of {GAIT_SHAPES}")
        _check(0 < self.force_fraction <= 1,
               "gait.force_fraction", "must lie in (0, 1]")


@dataclass(frozen=True)
class DiodeModel:
    """Bridge diode model: ideal-switch constant drop or Shockley exponential.

    Defaults are representative of an MBRS360-class Schottky part.
    """

    kind: str = "constant_drop"        # constant_drop | shockley
    forward_drop: float = 0.45         # V, constant_drop
    saturation_current: float = 1e-6   # A, shockley
    ideality: float = 1.05             # shockley, in [1, 2]
    thermal_voltage: float = 0.02585   # V

    def __post_init__(self):
        _check(self.kind in DIODE_KINDS,
               "circuit.diode.kind", f"must be one of {DIODE_KINDS}")
        _check(self.forward_drop > 0, "circuit.diode.forward_drop", "must be strictly positive")
        _check(self.saturation_current > 0,
               "circuit.diode.saturation_current", "must be strictly positive")
        _check(1.0 <= self.ideality <= 2.0, "circuit.diode.ideality", "must lie in [1, 2]")
        _check(self.thermal_voltage > 0,
               "circuit.diode.thermal_voltage", "must be strictly positive")


@dataclass(frozen=True)
class BatteryModel:
    """Coulomb-counting coin-cell model: ideal source + internal resistance."""

    nominal_voltage: float = 3.6      # V
    internal_resistance: float = 2.0  # ohm
    capacity: float = 144.0           # C (40 mAh coin cell)
    initial_charge: float = 72.0      # C

    def __post_init__(self):
        _check(self.nominal_voltage >= 0,
               "circuit.load.battery.nominal_voltage", "must be nonnegative")
        _check(self.internal_resistance > 0,
               "circuit.load.battery.internal_resistance", "must be strictly positive")
        _check(self.capacity > 0, "circuit.load.battery.capacity", "must be strictly positive")
        _check(0 <= self.initial_charge <= self.capacity,
               "circuit.load.battery.initial_charge", "must lie in [0, capacity]")


@dataclass(frozen=True)
class CircuitConfig:
    """Rectifier network: diode bridge -> smoothing cap in parallel with load."""

    diode: DiodeModel = field(default_factory=DiodeModel)
    smoothing_cap: float = 470e-6      # F
    load_kind: str = "resistor"        # resistor | battery | open
    load_resistance: float = 170e3     # ohm, used when load_kind == resistor
    battery: BatteryModel = field(default_factory=BatteryModel)
    cap_initial_voltage: float = 0.0   # V

    def __post_init__(self):
        _check(self.smoothing_cap >= 0, "circuit.smoothing_cap", "must be nonnegative")
        _check(self.load_kind in LOAD_KINDS,
               "circuit.load.kind", f"must be one of {LOAD_KINDS}")
        _check(self.load_resistance > 0,
               "circuit.load.resistance", "must be strictly positive")
        _check(self.cap_initial_voltage >= 0,
               "circuit.cap_initial_voltage", "must be nonnegative")


@dataclass(frozen=True)
class SimConfig:
    """One complete simulation scenario. Immutable; safe to share across threads."""

    design: HarvesterDesign = field(default_factory=HarvesterDesign)
    gait: GaitProfile = field(default_factory=GaitProfile)
    circuit: CircuitConfig = field(default_factory=CircuitConfig)
    dt: float = 1e-5            # s
    duration: float = 10.0      # s
    record_stride: int = 10     # integration steps per recorded sample
    em_coupling: bool = True    # False: circuit sees the EMF but exerts no
                                # reaction force (generator-only measurement)

    def __post_init__(self):
        _check(self.dt > 0, "sim.dt", "must be strictly positive")
        _check(self.duration >= self.dt, "sim.duration", "must be >= sim.dt")
        _check(self.dt <= 0.1 / self.gait.cadence,
               "sim.dt", "must be <= 0.1 / gait.cadence (resolve the pulse)")
        _check(self.record_stride >= 1, "sim.record_stride", "must be >= 1")


def reference_design() -> SimConfig:
    """Deterministic reference scenario used by tests, docs, and the CLI.

    Component values are implementer-calibrated defaults; see the README
    defaults table. Successive calls return structurally identical values.
    """
    return SimConfig()


# -- dotted-key schema ------------------------------------------------------
#
# Maps each normative config key to the attribute chain inside SimConfig and
# the expected value type. This table is the single source of truth for
# parsing, serialization, and --set overrides.

KEY_PATHS: dict[str, tuple[tuple[str, ...], type]] = {
    "design.moving_mass": (("design", "moving_mass"), float),
    "design.spring_k": (("design", "spring_k"), float),
    "design.mech_damping": (("design", "mech_damping"), float),
    "design.stroke_limit": (("design", "stroke_limit"), float),
    "design.coil_turns": (("design", "coil_turns"), int),
    "design.coil_radius": (("design", "coil_radius"), float),
    "design.coil_resistance": (("design", "coil_resistance"), float),
    "design.coil_inductance": (("design", "coil_inductance"), float),
    "design.magnet_moment": (("design", "magnet_moment"), float),
    "design.end_magnet_moment": (("design", "end_magnet_moment"), float),
    "design.end_gap": (("design", "end_gap"), float),
    "gait.cadence": (("gait", "cadence"), float),
    "gait.peak_force": (("gait", "peak_force"), float),
    "gait.duty": (("gait", "duty"), float),
    "gait.shape": (("gait", "shape"), str),
    "gait.force_fraction": (("gait", "force_fraction"), float),
    "circuit.diode.kind": (("circuit", "diode", "kind"), str),
    "circuit.diode.forward_drop": (("circuit", "diode", "forward_drop"), float),
    "circuit.diode.saturation_current": (("circuit", "diode", "saturation_current"), float),
    "circuit.diode.ideality": (("circuit", "diode", "ideality"), float),
    "circuit.diode.thermal_voltage": (("circuit", "diode", "thermal_voltage"), float),
    "circuit.smoothing_cap": (("circuit", "smoothing_cap"), float),
    "circuit.load.kind": (("circuit", "load_kind"), str),
    "circuit.load.resistance": (("circuit", "load_resistance"), float),
    "circuit.load.battery.nominal_voltage": (("circuit", "battery", "nominal_voltage"), float),
    "circuit.load.battery.internal_resistance": (("circuit", "battery", "internal_resistance"), float),
    "circuit.load.battery.capacity": (("circuit", "battery", "capacity"), float),
    "circuit.load.battery.initial_charge": (("circuit", "battery", "initial_charge"), float),
    "sim.dt": (("dt",), float),
    "sim.duration": (("duration",), float),
    "sim.record_stride": (("record_stride",), int),
    "sim.em_coupling": (("em_coupling",), bool),
}

# Optimization problems ride in the same file under optimize.*; they are not
# part of SimConfig and are consumed by the optimize module.
OPTIMIZE_KEYS: dict[str, type] = {
    "optimize.objective": str,
    "optimize.variables": list,
    "optimize.constraints": list,
    "optimize.penalty_weight": float,
    "optimize.max_evals": int,
    "optimize.tol": float,
    "optimize.points_per_axis": int,
}


def get_path(cfg: SimConfig, key: str):
    """Read one dotted-key value from a config."""
    if key not in KEY_PATHS:
        raise ConfigError(f"{key}: unknown config key")
    obj = cfg
    for attr in KEY_PATHS[key][0]:
        obj = getattr(obj, attr)
    return obj


def set_path(cfg: SimConfig, key: str, value) -> SimConfig:
    """Return a new config with one dotted-key value replaced (and revalidated)."""
    if key not in KEY_PATHS:
        raise ConfigError(f"{key}: unknown config key")
    chain, typ = KEY_PATHS[key]
    value = _coerce(key, typ, value)

    def rebuild(obj, attrs):
        if len(attrs) == 1:
            return dataclasses.replace(obj, **{attrs[0]: value})
        child = rebuild(getattr(obj, attrs[0]), attrs[1:])
        return dataclasses.replace(obj, **{attrs[0]: child})

    return rebuild(cfg, chain)


def _coerce(key: str, typ: type, value):
    """Coerce a parsed TOML or --set string value to the schema type."""
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {value!r}") from None
    if typ is int:
        if isinstance(value, bool):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        if isinstance(value, float) and value != int(value):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {value!r}") from None
    if typ is bool:
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "false"):
            return value.lower() == "true"
        raise ConfigError(f"{key}: expected true or false, got {value!r}")
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    return value


def _flatten(table: dict, prefix: str = "") -> dict:
    flat = {}
    for name, value in table.items():
        key = f"{prefix}{name}"
        if isinstance(value, dict):
            flat.update(_flatten(value, key + "."))
        else:
            flat[key] = value
    return flat


def config_from_flat(flat: dict) -> SimConfig:
    """Build a validated SimConfig from dotted keys over reference defaults."""
    cfg = reference_design()
    for key, value in flat.items():
        if key in OPTIMIZE_KEYS:
            continue
        cfg = set_path(cfg, key, value)
    return cfg


def loads_config(text: str) -> "tuple[SimConfig, dict]":
    """Parse TOML text; returns (SimConfig, optimize-key dict)."""
    try:
        table = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    flat = _flatten(table)
    for key in flat:
        if key not in KEY_PATHS and key not in OPTIMIZE_KEYS:
            raise ConfigError(f"{key}: unknown config key")
    opt = {k: _coerce(k, OPTIMIZE_KEYS[k], v) if OPTIMIZE_KEYS.get(k) in (float, int) else v
           for k, v in flat.items() if k in OPTIMIZE_KEYS}
    return config_from_flat(flat), opt


def load_config(path) -> SimConfig:
    """Load and validate a scenario config file. Missing keys take defaults."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    cfg, _ = loads_config(p.read_text())
    return cfg


def load_optimize_spec(path) -> dict:
    """Return the optimize.* key group of a config file (empty if absent)."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    _, opt = loads_config(p.read_text())
    return opt


def _toml_value(typ: type, value) -> str:
    if typ is float:
        return repr(float(value))
    if typ is bool:
        return "true" if value else "false"
    if typ is int:
        return str(int(value))
    return '"' + str(value) + '"'


def dumps_config(cfg: SimConfig) -> str:
    """Serialize every schema key; load/dump round-trips are exact."""
    lines = [f"{key} = {_toml_value(typ, get_path(cfg, key))}"
             for key, (_, typ) in KEY_PATHS.items()]
    return "\n".join(lines) + "\n"


def save_config(cfg: SimConfig, path):
    Path(path).write_text(dumps_config(cfg))
