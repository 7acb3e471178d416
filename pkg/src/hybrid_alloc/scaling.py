"""Dimensionless cruise problem: affine state/time scaling and arc coefficients.

The scaled states are ``mhat = a1*m + b1`` and ``qhat = a2*q + b2`` with the
time normalised to ``that = t / t_f``. Both scalings are pinned so that
``mhat(0) = 1`` and ``qhat = 1`` means a full pack; the remaining freedom is
the unit of each state (``mass_scale`` kg and ``charge_scale`` Ah per scaled
unit).
"""
from dataclasses import dataclass, replace, field
import math

from .errors import DomainError, InfeasibleError, SingularityError
from .flight_env import cruise_power_coefficients, air_density
from .propulsion import power_split_feasible, Engine

SECONDS_PER_HOUR = 3600.0


@dataclass(frozen=True)
class MissionSpec:
    range: float
    cruise_speed: float
    altitude: float
    m0: float
    soc0: float
    soc_f: float
    charging_allowed: bool = True
    density: float | None = None

    def __post_init__(self):
        if self.range <= 0 or self.cruise_speed <= 0 or self.m0 <= 0:
            raise DomainError("range, cruise_speed and m0 must be positive")
        if not (0.0 <= self.soc0 <= 1.0 and 0.0 <= self.soc_f <= 1.0):
            raise DomainError("state-of-charge endpoints must lie in [0, 1]")

    @property
    def duration(self):
        return self.range / self.cruise_speed

    def rho(self):
        return self.density if self.density is not None else air_density(self.altitude)


@dataclass(frozen=True)
class ScaledOCP:
    """Coefficients of the scaled dynamics

    ``dmhat/dthat = k11*tau + k10`` and
    ``dqhat/dthat = k21*tau + k20 + k22*mhat**2 + k23*mhat``.
    """

    a1: float
    b1: float
    a2: float
    b2: float
    k10: float
    k11: float
    k20: float
    k21: float
    k22: float
    k23: float
    qhat0: float
    qhatf: float
    t_f: float
    mhat0: float = 1.0
    engine: Engine | None = field(default=None, compare=False)

    def mass_rate(self, mhat, tau):
        return self.k11 * tau + self.k10

    def charge_rate(self, mhat, tau):
        return self.k21 * tau + self.k20 + self.k22 * mhat * mhat + self.k23 * mhat

    def rescaled(self, factor):
        """Same physics flown for ``factor`` times the duration."""
        return replace(self, k10=self.k10 * factor, k11=self.k11 * factor,
                       k20=self.k20 * factor, k21=self.k21 * factor,
                       k22=self.k22 * factor, k23=self.k23 * factor,
                       t_f=self.t_f * factor)

    def with_params(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class ArcCoefficients:
    h10: float
    h11: float
    h12: float
    h13: float
    g11: float
    g12: float
    g13: float
    k30: float
    k31: float
    k32: float
    r0: float
    f1: float
    f2: float
    f3: float


def build_scaled_ocp(aircraft, mission, mass_scale=None, charge_scale=None):
    """Construct the scaled problem for a constant-speed, constant-altitude cruise.

    Parameters
    ----------
    aircraft : AircraftConfig
    mission : MissionSpec
    mass_scale : float, optional
        Kilograms per unit of ``mhat``; defaults to ``mission.m0`` (``b1 = 0``).
    charge_scale : float, optional
        Ah per unit of ``qhat``; defaults to the pack capacity (``qhat = SOC``).
    """
    pt = aircraft.powertrain
    pack = pt.battery
    q_pack = pack.capacity
    rho = mission.rho()
    a_coef, b_coef = cruise_power_coefficients(aircraft.airframe, mission.cruise_speed, rho)
    p_req0 = a_coef + b_coef * mission.m0 ** 2
    if not power_split_feasible(pt, p_req0):
        raise InfeasibleError(
            f"cruise demand {p_req0 / 1e3:.1f} kW exceeds installed propulsive power "
            f"{pt.prop_efficiency * (pt.engine.p_max + pt.motor.p_max) / 1e3:.1f} kW")

    mass_scale = mission.m0 if mass_scale is None else mass_scale
    charge_scale = q_pack if charge_scale is None else charge_scale
    if mass_scale <= 0 or charge_scale <= 0:
        raise DomainError("state scales must be positive")
    a1 = 1.0 / mass_scale
    b1 = 1.0 - a1 * mission.m0
    a2 = 1.0 / charge_scale
    b2 = 1.0 - a2 * q_pack

    t_f = mission.duration
    eng = pt.engine
    eta_p = pt.prop_efficiency
    k11 = -a1 * t_f * eng.c1 * eng.p_max
    k10 = -a1 * t_f * eng.c2
    alpha = a2 * t_f / (SECONDS_PER_HOUR * pt.motor.efficiency * pack.voltage)
    quad = alpha * b_coef / (eta_p * a1 * a1)
    k21 = alpha * eng.p_max
    k22 = -quad
    k23 = 2.0 * quad * b1
    k20 = -(alpha / eta_p) * a_coef - quad * b1 * b1

    qhat0 = a2 * mission.soc0 * q_pack + b2
    qhatf = a2 * mission.soc_f * q_pack + b2
    return ScaledOCP(a1, b1, a2, b2, k10, k11, k20, k21, k22, k23,
                     qhat0, qhatf, t_f, 1.0, eng)


def arc_coefficients(ocp, strict=True):
    """Closed-form coefficients of the max, boundary and min arcs.

    With ``strict=False`` a boundary arc without a real tan representation
    yields NaN boundary constants instead of raising.
    """
    kappa = ocp.k11 + ocp.k10
    m0 = ocp.mhat0
    h13 = ocp.k22 * kappa ** 2 / 3.0
    h12 = (ocp.k22 * m0 + 0.5 * ocp.k23) * kappa
    h11 = ocp.k21 + ocp.k20 + ocp.k22 * m0 ** 2 + ocp.k23 * m0
    g13 = ocp.k22 * ocp.k10 ** 2 / 3.0
    g12 = ocp.k22 * ocp.k10
    g11 = 0.5 * ocp.k23 * ocp.k10
    k30 = ocp.k11 * ocp.k20 / ocp.k21 - ocp.k10
    k31 = ocp.k11 * ocp.k23 / ocp.k21
    k32 = ocp.k11 * ocp.k22 / ocp.k21
    disc = 4.0 * k32 * k30 - k31 ** 2
    if disc > 0.0:
        r0 = math.sqrt(disc)
        f1 = 2.0 * k32 / r0
        f2 = f1 * kappa
        f3 = k31 / r0
    elif strict:
        raise SingularityError(
            f"boundary arc has no real tan form (4 k32 k30 - k31^2 = {disc:.3e})")
    else:
        r0 = f1 = f2 = f3 = math.nan
    return ArcCoefficients(ocp.qhat0, h11, h12, h13, g11, g12, g13,
                           k30, k31, k32, r0, f1, f2, f3)


def scale_state(ocp, mass, charge):
    return ocp.a1 * mass + ocp.b1, ocp.a2 * charge + ocp.b2


def unscale_state(ocp, mhat, qhat):
    """Physical (kg, Ah) from scaled states."""
    return (mhat - ocp.b1) / ocp.a1, (qhat - ocp.b2) / ocp.a2


def unscale_time(ocp, that):
    return that * ocp.t_f


def initial_mass(ocp):
    return unscale_state(ocp, ocp.mhat0, ocp.qhat0)[0]
