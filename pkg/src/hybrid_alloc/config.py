"""Run configuration: schema, validation and canonical JSON round-trip.

All values are SI except battery capacity (Ah) and SFC (kg/kW/h). Every
field has a default taken from the bundled reference case, so a config file
only needs the fields it changes.
"""
from dataclasses import dataclass, field, fields, is_dataclass, asdict
import copy
import json
import math
import typing
from importlib import resources

from .aircraft import AircraftConfig
from .errors import ConfigError
from .flight_env import Airframe, G0
from .propulsion import (BatteryPack, Engine, Motor, PowertrainConfig,
                         calibrate_fuel_coefficients)
from .scaling import MissionSpec

CONFIG_ENV = "HYBRID_ALLOC_CONFIG"


@dataclass
class AirframeBlock:
    wing_area: float = 32.0
    cd0: float = 0.024
    k_induced: float = 0.056
    gravity: float = G0


@dataclass
class EngineBlock:
    unit_power: float = 560000.0
    count: int = 2
    unit_mass: float = 153.0
    c1: float | None = None
    c2: float | None = None
    sfc_anchor_cruise: float = 0.368
    sfc_anchor_max: float = 0.350


@dataclass
class MotorBlock:
    unit_power: float = 280000.0
    count: int = 1
    efficiency: float = 0.95
    unit_mass: float = 72.0


@dataclass
class BatteryBlock:
    n_series: int = 150
    n_parallel: int = 2
    cell_voltage: float = 3.6
    cell_capacity: float = 200.0
    cell_mass: float = 3.96


@dataclass
class AircraftBlock:
    airframe: AirframeBlock = field(default_factory=AirframeBlock)
    engine: EngineBlock = field(default_factory=EngineBlock)
    motor: MotorBlock = field(default_factory=MotorBlock)
    battery: BatteryBlock = field(default_factory=BatteryBlock)
    prop_efficiency: float = 0.7
    enforce_motor_limit: bool = False


@dataclass
class MissionBlock:
    range: float = 400000.0
    cruise_speed: float = 100.0
    altitude: float = 3000.0
    m0: float = 6350.0
    soc0: float = 0.7
    soc_f: float = 0.4
    charging_allowed: bool = True
    air_density: float | None = None


@dataclass
class SolverBlock:
    tolerance: float = 1e-10
    max_iterations: int = 100
    oracle_resolution: int = 400
    oracle_steps: int = 10000
    oracle_refine: int = 10
    oracle_tolerance: float = 5e-4
    trajectory_samples: int = 201


@dataclass
class CaseBlock:
    label: str = "case"
    n_parallel: int = 2
    m0: float = 6350.0
    soc0: float = 0.7
    soc_f: float = 1.0
    charging_allowed: bool = True


@dataclass
class ClimbConfigBlock:
    n_parallel: int = 2
    takeoff_mass: float = 6385.0


@dataclass
class ClimbBlock:
    path_angle: float = math.radians(4.0)
    speed: float = 70.0
    start_altitude: float = 0.0
    target_altitude: float = 3000.0
    initial_soc: float = 1.0
    steps: int = 5000
    configs: list[ClimbConfigBlock] = field(default_factory=lambda: [
        ClimbConfigBlock(1, 5785.0), ClimbConfigBlock(2, 6385.0), ClimbConfigBlock(3, 6985.0)])


def _default_cases():
    return [
        CaseBlock("case1", 1, 5750.0, 0.4, 1.0, True),
        CaseBlock("case2", 2, 6350.0, 0.7, 1.0, True),
        CaseBlock("case3", 2, 6350.0, 0.7, 0.5, False),
        CaseBlock("case4", 3, 6950.0, 0.8, 0.67, False),
    ]


@dataclass
class ScenarioBlock:
    cruise_speed: float = 80.0
    altitude: float = 3000.0
    ranges_km: list[float] = field(
        default_factory=lambda: [150.0 + 25.0 * i for i in range(11)])
    cases: list[CaseBlock] = field(default_factory=_default_cases)
    climb: ClimbBlock = field(default_factory=ClimbBlock)


@dataclass
class RunConfig:
    aircraft: AircraftBlock = field(default_factory=AircraftBlock)
    mission: MissionBlock = field(default_factory=MissionBlock)
    solver: SolverBlock = field(default_factory=SolverBlock)
    scenarios: ScenarioBlock = field(default_factory=ScenarioBlock)


# fields that must be strictly positive / lie in a closed unit interval
_POSITIVE = {
    "wing_area", "gravity", "unit_power", "unit_mass", "count", "efficiency",
    "n_series", "n_parallel", "cell_voltage", "cell_capacity", "cell_mass",
    "prop_efficiency", "range", "cruise_speed", "m0", "sfc_anchor_cruise",
    "sfc_anchor_max", "tolerance", "max_iterations", "oracle_resolution",
    "oracle_steps", "oracle_refine", "oracle_tolerance", "trajectory_samples",
    "speed", "takeoff_mass", "steps", "air_density", "c1",
}
_NON_NEGATIVE = {"cd0", "k_induced", "altitude", "start_altitude", "c2"}
_UNIT = {"soc0", "soc_f", "initial_soc", "efficiency", "prop_efficiency"}


def _coerce(value, hint, path):
    args = typing.get_args(hint)
    optional = type(None) in args
    base = next((t for t in args if t is not type(None)), hint) if args else hint
    if value is None:
        if optional:
            return None
        raise ConfigError(path, "must not be null")
    if base is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, "expected a boolean")
        return value
    if base is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, "expected an integer")
        return value
    if base is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, "expected a number")
        if not math.isfinite(value):
            raise ConfigError(path, "must be finite")
        return float(value)
    if base is str:
        if not isinstance(value, str):
            raise ConfigError(path, "expected a string")
        return value
    raise ConfigError(path, f"unsupported field type {hint}")


def _check_range(name, value, path):
    if value is None or isinstance(value, (bool, str)):
        return
    if name in _POSITIVE and not value > 0:
        raise ConfigError(path, "must be > 0")
    if name in _NON_NEGATIVE and value < 0:
        raise ConfigError(path, "must be >= 0")
    if name in _UNIT and not 0 <= value <= 1:
        raise ConfigError(path, "must lie in [0, 1]")


def _build(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError(path or "<root>", "expected an object")
    obj = cls()
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"{path}.{key}" if path else key, "unknown field")
    for f in fields(cls):
        if f.name not in data:
            continue
        sub = f"{path}.{f.name}" if path else f.name
        value = data[f.name]
        hint = f.type
        default = getattr(obj, f.name)
        if is_dataclass(default):
            setattr(obj, f.name, _build(type(default), value, sub))
        elif typing.get_origin(hint) is list:
            if not isinstance(value, list):
                raise ConfigError(sub, "expected an array")
            item = typing.get_args(hint)[0]
            out = []
            for i, v in enumerate(value):
                ipath = f"{sub}[{i}]"
                if is_dataclass(item):
                    out.append(_build(item, v, ipath))
                else:
                    v = _coerce(v, item, ipath)
                    _check_range("range", v, ipath)
                    out.append(v)
            setattr(obj, f.name, out)
        else:
            v = _coerce(value, hint, sub)
            _check_range(f.name, v, sub)
            setattr(obj, f.name, v)
    return obj


def from_dict(data):
    return _build(RunConfig, data, "")


def to_dict(config):
    return asdict(config)


def dumps(config):
    """Canonical JSON text: schema field order, two-space indent, LF newline."""
    return json.dumps(to_dict(config), indent=2) + "\n"


def loads(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc.msg} at line {exc.lineno}") from exc
    return from_dict(data)


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def bundled_config_text():
    return resources.files("hybrid_alloc").joinpath("data/paper-case.json").read_text("utf-8")


def default_config():
    return loads(bundled_config_text())


def mission_spec(config, **overrides):
    m = config.mission
    spec = dict(range=m.range, cruise_speed=m.cruise_speed, altitude=m.altitude, m0=m.m0,
                soc0=m.soc0, soc_f=m.soc_f, charging_allowed=m.charging_allowed,
                density=m.air_density)
    spec.update(overrides)
    return MissionSpec(**spec)


def build_aircraft(config):
    """Physical aircraft; fuel coefficients are calibrated unless given.

    Calibration anchors: the cruise SFC at the engine-alone shaft power of
    the configured mission, and the max-power SFC at the installed rating.
    """
    a = config.aircraft
    e = a.engine
    airframe = Airframe(a.airframe.wing_area, a.airframe.cd0, a.airframe.k_induced,
                        a.airframe.gravity)
    p_max = e.unit_power * e.count
    motor = Motor(a.motor.unit_power * a.motor.count, a.motor.efficiency,
                  a.motor.unit_mass * a.motor.count)
    b = a.battery
    pack = BatteryPack(b.n_series, b.n_parallel, b.cell_voltage, b.cell_capacity, b.cell_mass)
    if (e.c1 is None) != (e.c2 is None):
        raise ConfigError("aircraft.engine", "give both c1 and c2 or neither")
    if e.c1 is None:
        mission = mission_spec(config)
        shell = AircraftConfig(airframe, None)
        p_cruise = shell.cruise_power(mission.m0, mission.cruise_speed, mission.altitude,
                                      mission.density) / a.prop_efficiency
        c1, c2 = calibrate_fuel_coefficients((p_cruise, e.sfc_anchor_cruise),
                                             (p_max, e.sfc_anchor_max))
        if c1 <= 0 or c2 < 0:
            raise ConfigError("aircraft.engine",
                              f"calibration gives non-physical fuel law c1={c1:.3e}, c2={c2:.3e}; "
                              "engine-alone cruise power must be below the installed rating")
    else:
        c1, c2 = e.c1, e.c2
    engine = Engine(p_max, c1, c2, e.unit_mass * e.count)
    pt = PowertrainConfig(engine, motor, pack, a.prop_efficiency, a.enforce_motor_limit)
    return AircraftConfig(airframe, pt)


def copy_config(config):
    return copy.deepcopy(config)


def cruise_cases(config):
    from .scenarios import CruiseCase
    return [CruiseCase(c.label, c.n_parallel, c.m0, c.soc0, c.soc_f, c.charging_allowed)
            for c in config.scenarios.cases]


def climb_spec(config):
    from .scenarios import ClimbSpec
    c = config.scenarios.climb
    return ClimbSpec(c.path_angle, c.speed, c.target_altitude, c.initial_soc,
                     c.start_altitude, c.steps)


def climb_masses(config):
    return {c.n_parallel: c.takeoff_mass for c in config.scenarios.climb.configs}
