"""Aggregate aircraft configuration: airframe plus powertrain."""
from dataclasses import dataclass, replace

from .flight_env import Airframe, FlightPoint, power_required_cruise
from .propulsion import PowertrainConfig


@dataclass(frozen=True)
class AircraftConfig:
    airframe: Airframe
    powertrain: PowertrainConfig

    @property
    def engine(self):
        return self.powertrain.engine

    @property
    def motor(self):
        return self.powertrain.motor

    @property
    def battery(self):
        return self.powertrain.battery

    def with_parallel_paths(self, n_parallel):
        pt = replace(self.powertrain, battery=self.battery.with_parallel(n_parallel))
        return replace(self, powertrain=pt)

    def cruise_power(self, mass, speed, altitude, density=None):
        """Propulsive power demand (W) in level flight."""
        return power_required_cruise(FlightPoint(mass, speed, altitude, 0.0, density),
                                     self.airframe)
