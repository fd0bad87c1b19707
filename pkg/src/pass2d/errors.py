"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An input violates a documented precondition (wrong sign, empty list, ...)."""


class SingularityError(ValueError):
    """Geometry puts a receiver exactly on a radiator (zero propagation distance)."""


class InitializationError(RuntimeError):
    """Feasible swarm initialization could not be reached within the retry budget."""


class InfeasibleError(RuntimeError):
    """No feasible configuration was found; carries the best infeasible candidate."""

    def __init__(self, message, best_candidate=None, best_fitness_db=None):
        super().__init__(message)
        self.best_candidate = best_candidate
        self.best_fitness_db = best_fitness_db


class BudgetExceededError(RuntimeError):
    """An enumeration exceeds its configured work budget."""
