"""Fuel-optimal engine/battery power allocation for a parallel hybrid-electric
aircraft cruise, solved by arc parametrization with independent RK4 checks."""
from .aircraft import AircraftConfig
from .arc_solver import (ArcParameters, Solution, Trajectory, propagate_arc,
                         reconstruct_trajectory, solve, solve_no_charge)
from .config import RunConfig, build_aircraft, default_config, load, mission_spec
from .errors import (ConfigError, DomainError, HybridAllocError, InfeasibleError,
                     SingularityError, SolverError)
from .flight_env import Airframe, FlightPoint, air_density
from .oracle import ThrottleProfile, grid_search, grid_search_no_charge, simulate
from .propulsion import BatteryPack, Engine, Motor, PowertrainConfig
from .scaling import MissionSpec, ScaledOCP, arc_coefficients, build_scaled_ocp
from .scenarios import (ClimbSpec, CruiseCase, compare_architectures, range_sweep,
                        run_cruise_case, simulate_climb)
from .verification import check_ssc, sensitivity

__version__ = "0.1.0"
