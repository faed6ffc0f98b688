"""Stabilized finite elements for first-order advection-reaction problems on the unit square."""

from .analysis import ErrorReport, convergence_study, l2_error, robustness_sweep, sd_error
from .cases import ProblemCase, make_case, polynomial_case, smooth_case
from .formulations import (
    Solution,
    StabilizationConfig,
    check_galerkin_orthogonality,
    check_partial_coercivity,
    solve_case,
    solve_data_assimilation,
    solve_primal_dual,
    solve_standard,
)
from .linalg import SolverError
from .mesh import build_structured
from .space import build_space

__all__ = [
    "ErrorReport",
    "ProblemCase",
    "Solution",
    "SolverError",
    "StabilizationConfig",
    "build_space",
    "build_structured",
    "check_galerkin_orthogonality",
    "check_partial_coercivity",
    "convergence_study",
    "l2_error",
    "make_case",
    "polynomial_case",
    "robustness_sweep",
    "sd_error",
    "smooth_case",
    "solve_case",
    "solve_data_assimilation",
    "solve_primal_dual",
    "solve_standard",
]
