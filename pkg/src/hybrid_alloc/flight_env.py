"""Standard atmosphere and cruise/climb power demand.

Units are SI throughout. Altitudes are geometric; the ISA troposphere is
defined on geopotential height, so the conversion is applied internally.
"""
from dataclasses import dataclass
import math

from .errors import DomainError

G0 = 9.80665          # m/s^2
R_AIR = 287.05287     # J/(kg K)
T_SL = 288.15         # K
P_SL = 101325.0       # Pa
RHO_SL = 1.225        # kg/m^3
LAPSE = 0.0065        # K/m
EARTH_RADIUS = 6356766.0  # m, used for the geopotential conversion
TROPOPAUSE = 11000.0  # m


@dataclass(frozen=True)
class Airframe:
    wing_area: float
    cd0: float
    k_induced: float
    gravity: float = G0

    def __post_init__(self):
        if self.wing_area <= 0 or self.gravity <= 0:
            raise DomainError("wing_area and gravity must be positive")
        if self.cd0 < 0 or self.k_induced < 0:
            raise DomainError("drag coefficients must be non-negative")


@dataclass(frozen=True)
class FlightPoint:
    mass: float
    speed: float
    altitude: float
    path_angle: float = 0.0
    density: float | None = None  # overrides the ISA value when set

    def __post_init__(self):
        if self.mass <= 0 or self.speed <= 0:
            raise DomainError("mass and speed must be positive")
        if self.altitude < 0:
            raise DomainError("altitude must be non-negative")

    def rho(self):
        return self.density if self.density is not None else air_density(self.altitude)


def air_density(altitude):
    """ISA troposphere density in kg/m^3 at geometric ``altitude`` in metres."""
    if not 0.0 <= altitude <= TROPOPAUSE:
        raise DomainError(f"altitude {altitude} m outside troposphere [0, {TROPOPAUSE}]")
    h = EARTH_RADIUS * altitude / (EARTH_RADIUS + altitude)
    theta = (T_SL - LAPSE * h) / T_SL
    return RHO_SL * theta ** (G0 / (R_AIR * LAPSE) - 1.0)


def drag(point, airframe, lift=None):
    """Drag force in N from the parabolic polar; ``lift`` defaults to weight."""
    rho = point.rho()
    q_s = 0.5 * rho * point.speed ** 2 * airframe.wing_area
    if lift is None:
        lift = point.mass * airframe.gravity
    cl = lift / q_s
    return q_s * (airframe.cd0 + airframe.k_induced * cl * cl)


def power_required_cruise(point, airframe):
    """Level-flight propulsive power T*v in W, with thrust equal to drag."""
    if point.path_angle != 0.0:
        raise DomainError("cruise power requires path_angle = 0")
    return drag(point, airframe) * point.speed


def power_required_climb(point, airframe):
    """Quasi-steady climb power (D + m g sin(gamma)) v in W.

    Lift balances the weight component normal to the path, m g cos(gamma).
    """
    gamma = point.path_angle
    weight = point.mass * airframe.gravity
    d = drag(point, airframe, lift=weight * math.cos(gamma))
    return (d + weight * math.sin(gamma)) * point.speed


def cruise_power_coefficients(airframe, speed, rho):
    """Return (A, B) with P_req(m) = A + B m^2 for level flight."""
    s = airframe.wing_area
    a = 0.5 * rho * s * speed ** 3 * airframe.cd0
    b = 2.0 * airframe.k_induced * airframe.gravity ** 2 / (rho * s * speed)
    return a, b
