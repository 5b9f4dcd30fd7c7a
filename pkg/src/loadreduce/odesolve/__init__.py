"""Adaptive initial-value integrators: an explicit embedded RK 5(4) pair for
non-stiff problems and implicit TR-BDF2 for stiff ones, with shared dense
output, breakpoint restarts and step diagnostics."""

from .common import (
    NumericalBlowup,
    OdeError,
    OdeProblem,
    SolverConfig,
    SolverStats,
    StiffnessOrSingularity,
    Trajectory,
    dense_output,
    integrate,
    numerical_jacobian,
    resample,
)

__all__ = [
    "NumericalBlowup",
    "OdeError",
    "OdeProblem",
    "SolverConfig",
    "SolverStats",
    "StiffnessOrSingularity",
    "Trajectory",
    "dense_output",
    "integrate",
    "numerical_jacobian",
    "resample",
]
