"""Engine, motor and battery-pack models and the throttle/current power split."""
from dataclasses import dataclass

from .errors import DomainError, InfeasibleError

# kg/s per W  ->  kg/kW/h
SFC_UNIT = 3.6e6


@dataclass(frozen=True)
class Engine:
    """Installed engine set with an affine fuel-flow law ``c1 * P + c2``.

    ``p_max`` is the total output of all installed units.
    """

    p_max: float
    c1: float
    c2: float
    mass: float = 0.0

    def __post_init__(self):
        if self.p_max <= 0 or self.c1 <= 0 or self.c2 < 0:
            raise DomainError("engine requires p_max > 0, c1 > 0, c2 >= 0")


@dataclass(frozen=True)
class Motor:
    p_max: float
    efficiency: float
    mass: float = 0.0

    def __post_init__(self):
        if self.p_max <= 0 or not 0.0 < self.efficiency <= 1.0:
            raise DomainError("motor requires p_max > 0 and 0 < efficiency <= 1")


@dataclass(frozen=True)
class BatteryPack:
    n_series: int
    n_parallel: int
    cell_voltage: float
    cell_capacity: float
    cell_mass: float

    def __post_init__(self):
        if min(self.n_series, self.n_parallel) < 1:
            raise DomainError("pack needs at least one cell in each direction")
        if min(self.cell_voltage, self.cell_capacity, self.cell_mass) <= 0:
            raise DomainError("cell voltage, capacity and mass must be positive")

    @property
    def voltage(self):
        return self.n_series * self.cell_voltage

    @property
    def capacity(self):
        """Pack capacity in Ah."""
        return self.n_parallel * self.cell_capacity

    @property
    def mass(self):
        return self.n_series * self.n_parallel * self.cell_mass

    def with_parallel(self, n_parallel):
        return BatteryPack(self.n_series, n_parallel, self.cell_voltage,
                           self.cell_capacity, self.cell_mass)


@dataclass(frozen=True)
class PowertrainConfig:
    engine: Engine
    motor: Motor
    battery: BatteryPack
    prop_efficiency: float
    enforce_motor_limit: bool = False

    def __post_init__(self):
        if not 0.0 < self.prop_efficiency <= 1.0:
            raise DomainError("prop_efficiency must lie in (0, 1]")


def fuel_flow(engine, p_out):
    """Fuel mass flow in kg/s at engine output ``p_out`` (W)."""
    if not 0.0 <= p_out <= engine.p_max * (1.0 + 1e-12):
        raise DomainError(f"engine output {p_out} W outside [0, {engine.p_max}]")
    return engine.c1 * p_out + engine.c2


def sfc(engine, p_out):
    """Specific fuel consumption in kg/kW/h."""
    if p_out <= 0.0:
        raise DomainError("SFC is undefined at zero engine output")
    return SFC_UNIT * fuel_flow(engine, p_out) / p_out


def calibrate_fuel_coefficients(anchor_lo, anchor_hi):
    """Fit ``(c1, c2)`` through two ``(power W, SFC kg/kW/h)`` anchors.

    Each anchor fixes a flow ``sfc * P / 3.6e6`` and the affine law is the
    line through the two flows.
    """
    (p1, s1), (p2, s2) = anchor_lo, anchor_hi
    if p1 == p2:
        raise DomainError("calibration anchors need distinct powers")
    if s1 <= 0 or s2 <= 0 or p1 <= 0 or p2 <= 0:
        raise DomainError("calibration anchors need positive power and SFC")
    w1 = s1 * p1 / SFC_UNIT
    w2 = s2 * p2 / SFC_UNIT
    c1 = (w2 - w1) / (p2 - p1)
    c2 = w1 - c1 * p1
    return c1, c2


def battery_current(config, p_req, throttle):
    """Battery current in A; positive discharges, negative charges."""
    if not 0.0 <= throttle <= 1.0:
        raise DomainError(f"throttle {throttle} outside [0, 1]")
    if p_req < 0:
        raise DomainError("power demand must be non-negative")
    motor_out = p_req / config.prop_efficiency - throttle * config.engine.p_max
    if config.enforce_motor_limit and abs(motor_out) > config.motor.p_max * (1 + 1e-12):
        raise InfeasibleError(
            f"motor power {motor_out:.1f} W exceeds limit {config.motor.p_max:.1f} W")
    return motor_out / (config.motor.efficiency * config.battery.voltage)


def power_split_feasible(config, p_req):
    return p_req <= config.prop_efficiency * (config.engine.p_max + config.motor.p_max)


def engine_alone_throttle(config, p_req):
    """Throttle at which the battery current is exactly zero."""
    return p_req / (config.prop_efficiency * config.engine.p_max)
