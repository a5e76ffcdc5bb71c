"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from typing import List, Optional


class TegSimError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ConfigError(TegSimError):
    """Config file missing, unparseable, or a malformed override."""

    exit_code = 2


class SolverConvergenceError(TegSimError, RuntimeError):
    """Iterative solve did not reach its tolerance within the iteration cap."""

    exit_code = 3

    def __init__(self, message: str, residual_history: Optional[List[float]] = None, iterations: int = 0):
        super().__init__(message)
        self.residual_history = list(residual_history or [])
        self.iterations = iterations


class InvalidInputError(TegSimError, ValueError):
    """Physically meaningless argument (non-positive area, temperature, ...)."""

    exit_code = 4


class GeometryError(InvalidInputError):
    """Geometry, unit cell or layout invariant violated."""


class SingularCircuitError(TegSimError):
    """Thermal circuit with no resistance anywhere."""

    exit_code = 4


class ValidationError(TegSimError, ValueError):
    """Resolved config failed one or more invariant pre-checks."""

    exit_code = 4

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ResourceLimitError(TegSimError, MemoryError):
    """Voxel grid larger than the configured budget."""

    exit_code = 5

    def __init__(self, message: str, suggested_resolution: Optional[float] = None):
        super().__init__(message)
        self.suggested_resolution = suggested_resolution
