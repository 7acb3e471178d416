"""Exception hierarchy shared by all modules.

Every error carries a short machine-readable ``kind`` so the CLI can map it
to an exit code without string matching.
"""


class HybridAllocError(Exception):
    kind = "error"
    exit_code = 1


class DomainError(HybridAllocError, ValueError):
    """An argument lies outside the domain of a model function."""

    kind = "domain"
    exit_code = 2


class InfeasibleError(HybridAllocError):
    """The requested mission or operating point cannot be flown."""

    kind = "infeasible"
    exit_code = 3


class BoundaryInfeasibleError(InfeasibleError):
    kind = "boundary_infeasible"


class DepletionError(InfeasibleError):
    kind = "battery_depleted"


class ArcValidityError(HybridAllocError):
    """A closed-form arc was evaluated past a pole of its tan representation."""

    kind = "arc_validity"


class SingularityError(HybridAllocError):
    kind = "singular"


class SolverError(HybridAllocError):
    """Newton iteration did not converge; ``best`` holds the best iterate."""

    kind = "solver"

    def __init__(self, message, best=None, residual_norm=None):
        super().__init__(message)
        self.best = best
        self.residual_norm = residual_norm


class ConfigError(HybridAllocError, ValueError):
    kind = "config"
    exit_code = 2

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
