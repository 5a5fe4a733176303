"""Piecewise maps, essential ranges, and Filippov differential inclusions."""

from _filippov import (
    ConvexApprox,
    ConvergenceError,
    DomainError,
    Expr,
    ExprParseError,
    NondifferentiableError,
    Problem,
    ResidualReport,
    SolverError,
    Trajectory,
    ValidationError,
    convex_hull,
    distance_to_hull,
    __version__,
)

__all__ = [
    "ConvexApprox",
    "ConvergenceError",
    "DomainError",
    "Expr",
    "ExprParseError",
    "NondifferentiableError",
    "Problem",
    "ResidualReport",
    "SolverError",
    "Trajectory",
    "ValidationError",
    "convex_hull",
    "distance_to_hull",
    "__version__",
]
