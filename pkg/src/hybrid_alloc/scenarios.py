"""Comparative studies: climb fuel per pack size, cruise cases, range sweeps
and the connected-versus-independent architecture verdict."""
from dataclasses import dataclass, field
import math

import numpy as np

from .arc_solver import solve, solve_no_charge
from .errors import DepletionError, DomainError, InfeasibleError
from .flight_env import FlightPoint, air_density, power_required_climb
from .scaling import MissionSpec, build_scaled_ocp
from .verification import sensitivity

SECONDS_PER_HOUR = 3600.0


@dataclass(frozen=True)
class ClimbSpec:
    path_angle: float
    speed: float
    target_altitude: float
    initial_soc: float = 1.0
    start_altitude: float = 0.0
    steps: int = 5000

    def __post_init__(self):
        if self.target_altitude <= 0 or self.path_angle <= 0 or self.speed <= 0:
            raise DomainError("climb needs positive target altitude, path angle and speed")
        if self.start_altitude > self.target_altitude:
            raise DomainError("start altitude above target")
        if not 0.0 <= self.initial_soc <= 1.0:
            raise DomainError("initial_soc must lie in [0, 1]")


@dataclass(frozen=True)
class ClimbResult:
    fuel: float
    soc_after: float
    remaining: float  # Ah
    duration: float  # s
    engine_energy: float  # J of shaft work
    motor_energy: float  # J of shaft work
    battery_energy: float  # J drawn at the terminals
    mechanical_energy: float  # J of propulsive work


def simulate_climb(aircraft, spec, takeoff_mass):
    """Constant-angle climb with the motor at full power and the engine
    covering the rest of the propulsive demand.

    RK4 in time over ``spec.steps`` equal steps; the altitude advances at
    ``v sin(gamma)`` so the climb ends exactly at the target.
    """
    pt = aircraft.powertrain
    eng, mot, pack = pt.engine, pt.motor, pt.battery
    climb_rate = spec.speed * math.sin(spec.path_angle)
    duration = (spec.target_altitude - spec.start_altitude) / climb_rate
    q0 = spec.initial_soc * pack.capacity
    if duration == 0.0:
        return ClimbResult(0.0, spec.initial_soc, q0, 0.0, 0.0, 0.0, 0.0, 0.0)

    def powers(t, m):
        h = spec.start_altitude + climb_rate * t
        point = FlightPoint(m, spec.speed, h, spec.path_angle, air_density(h))
        p_req = power_required_climb(point, aircraft.airframe)
        shaft = p_req / pt.prop_efficiency
        if shaft > eng.p_max + mot.p_max:
            raise InfeasibleError(
                f"climb demand {p_req:.0f} W at h={h:.0f} m exceeds installed power")
        p_m = min(mot.p_max, shaft)
        return p_req, shaft - p_m, p_m

    def rates(t, y):
        p_req, p_e, p_m = powers(t, y[0])
        current = p_m / (mot.efficiency * pack.voltage)
        return np.array([-(eng.c1 * p_e + eng.c2), -current / SECONDS_PER_HOUR,
                         p_e, p_m, p_m / mot.efficiency, p_req])

    # state: mass, charge Ah, then four accumulated energies
    y = np.array([takeoff_mass, q0, 0.0, 0.0, 0.0, 0.0])
    h = duration / spec.steps
    t = 0.0
    for _ in range(spec.steps):
        k1 = rates(t, y)
        k2 = rates(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rates(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rates(t + h, y + h * k3)
        y = y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        t += h
        if y[1] < 0.0:
            raise DepletionError(
                f"battery depleted at h={spec.start_altitude + climb_rate * t:.0f} m")
    return ClimbResult(fuel=takeoff_mass - y[0], soc_after=y[1] / pack.capacity,
                       remaining=y[1], duration=duration, engine_energy=y[2],
                       motor_energy=y[3], battery_energy=y[4], mechanical_energy=y[5])


@dataclass(frozen=True)
class CruiseCase:
    label: str
    n_parallel: int
    m0: float
    soc0: float
    socf: float
    charging_allowed: bool = True

    def __post_init__(self):
        if self.n_parallel < 1:
            raise DomainError("n_parallel must be at least 1")


def cruise_problem(aircraft, case, range_m, speed, altitude, density=None):
    """Scaled problem for one case; the pack is resized to the case."""
    ac = aircraft.with_parallel_paths(case.n_parallel)
    mission = MissionSpec(range_m, speed, altitude, case.m0, case.soc0, case.socf,
                          case.charging_allowed, density)
    return build_scaled_ocp(ac, mission)


def run_cruise_case(aircraft, case, range_m, speed, altitude=3000.0, density=None):
    """Optimal cruise fuel in kg for one case."""
    ocp = cruise_problem(aircraft, case, range_m, speed, altitude, density)
    sol = solve(ocp) if case.charging_allowed else solve_no_charge(ocp)
    return sol.fuel_burned


def duration_sensitivity(aircraft, case, range_m, ref_range_m, speed, altitude=3000.0,
                         density=None):
    """dG/dt_f with t_f measured in units of the ``ref_range_m`` flight time.

    Returns ``(dG_dtf, a1)``; ``a1`` converts scaled mass back to kg.
    """
    ocp = cruise_problem(aircraft, case, range_m, speed, altitude, density)
    rep = sensitivity(solve(ocp), ocp, parameter="t_f")
    # the solver's multiplier is relative to this flight, t_f = range_m / ref_range_m
    return rep.dG_dp * ref_range_m / range_m, ocp.a1


def marginal_fuel_per_km(aircraft, case, range_m, speed, altitude=3000.0, density=None):
    """Fuel cost of the last kilometre, from the duration sensitivity of the optimum."""
    dg, a1 = duration_sensitivity(aircraft, case, range_m, 1000.0, speed, altitude, density)
    # G = -mhat_f, so kilograms follow by dividing by a1
    return dg / a1


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float


def linear_fit(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return LinearFit(float(slope), float(intercept), r2)


@dataclass
class SweepResult:
    ranges_km: list
    labels: list
    fuel: dict = field(default_factory=dict)  # (label, range_km) -> kg, NaN for gaps
    fits: dict = field(default_factory=dict)  # label -> LinearFit
    gaps: dict = field(default_factory=dict)  # (label, range_km) -> reason

    def series(self, label):
        return np.array([self.fuel[(label, r)] for r in self.ranges_km])


def range_sweep(aircraft, cases, ranges_km, speed, altitude=3000.0, density=None):
    """Fuel for each (case, range) and a least-squares line per case.

    Infeasible cells become NaN gaps and are left out of the fits.
    """
    res = SweepResult(list(ranges_km), [c.label for c in cases])
    for case in cases:
        for r in ranges_km:
            try:
                res.fuel[(case.label, r)] = run_cruise_case(
                    aircraft, case, r * 1000.0, speed, altitude, density)
            except InfeasibleError as exc:
                res.fuel[(case.label, r)] = math.nan
                res.gaps[(case.label, r)] = str(exc)
        y = res.series(case.label)
        ok = np.isfinite(y)
        if ok.sum() >= 2:
            res.fits[case.label] = linear_fit(np.asarray(ranges_km, float)[ok], y[ok])
    return res


@dataclass(frozen=True)
class SizingRow:
    label: str
    n_parallel: int
    charging_allowed: bool
    climb_fuel: float
    cruise_fuel: float
    total_fuel: float


@dataclass(frozen=True)
class ArchitectureReport:
    charging_fuel: float
    no_charge_fuel: float
    delta: float
    delta_percent: float
    rows: tuple
    verdict: str


def compare_architectures(aircraft, mission, cases=(), climb=None, climb_masses=None,
                          range_m=None, speed=None, altitude=None, density=None):
    """Charging versus no-charge on ``mission``, plus climb + cruise sizing rows.

    ``climb_masses`` maps ``n_parallel`` to take-off mass; rows are only
    produced for cases whose pack size has a climb entry.
    """
    ocp = build_scaled_ocp(aircraft, mission)
    with_charge = solve(ocp).fuel_burned
    without = solve_no_charge(ocp).fuel_burned
    delta = without - with_charge
    pct = 100.0 * delta / without
    range_m = mission.range if range_m is None else range_m
    speed = mission.cruise_speed if speed is None else speed
    altitude = mission.altitude if altitude is None else altitude

    rows = []
    climb_masses = climb_masses or {}
    for case in cases:
        if climb is None or case.n_parallel not in climb_masses:
            continue
        ac = aircraft.with_parallel_paths(case.n_parallel)
        c_fuel = simulate_climb(ac, climb, climb_masses[case.n_parallel]).fuel
        r_fuel = run_cruise_case(aircraft, case, range_m, speed, altitude, density)
        rows.append(SizingRow(case.label, case.n_parallel, case.charging_allowed,
                              c_fuel, r_fuel, c_fuel + r_fuel))

    words = [f"in-flight charging saves {delta:.4f} kg ({pct:.3f}% of the no-charge fuel)"]
    if delta < 0:
        words = [f"in-flight charging costs {-delta:.4f} kg ({-pct:.3f}%)"]
    if rows:
        best = min(rows, key=lambda r: (r.total_fuel, r.label))
        mode = "charging" if best.charging_allowed else "no charging"
        words.append(f"lowest total fuel: {best.label} ({best.n_parallel} parallel paths, "
                     f"{mode}) at {best.total_fuel:.2f} kg")
    return ArchitectureReport(with_charge, without, delta, pct, tuple(rows), "; ".join(words))
