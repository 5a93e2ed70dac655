"""Exception hierarchy shared by the model, solver and simulation layers."""

from __future__ import annotations

from typing import Optional


class HomogenizationError(Exception):
    """Root of every error raised by this project."""


class ModelDimensionError(HomogenizationError, ValueError):
    pass


class GridError(HomogenizationError, ValueError):
    pass


class SolverError(HomogenizationError, RuntimeError):
    pass


class DensityPositivityError(SolverError):
    pass


class FredholmCompatibilityError(SolverError):
    def __init__(self, component: int, functional: float, tolerance: float):
        self.component = component
        self.functional = functional
        self.tolerance = tolerance
        super().__init__(
            f"Fredholm compatibility violated for component {component}: "
            f"|sum m*rhs| = {abs(functional):.3e} exceeds centering_tol {tolerance:.1e}"
        )


class SimulationError(HomogenizationError, RuntimeError):
    def __init__(self, message: str, step: Optional[int] = None):
        self.step = step
        super().__init__(message if step is None else f"{message} (step {step})")


class SimulationConfigError(HomogenizationError, ValueError):
    def __init__(self, message: str, suggested_step: Optional[float] = None):
        self.suggested_step = suggested_step
        super().__init__(message)


class HorizonError(HomogenizationError, ValueError):
    pass


class ConfigError(HomogenizationError, ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
