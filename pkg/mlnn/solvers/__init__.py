"""
Finite-difference solvers, nested grids and solver diagnostics
"""

from .advection_diffusion import (
    discrete_advection_diffusion,
    exact_advection_diffusion,
    solve_advection_diffusion,
)
from .base import Solution
from .burgers import newton_burgers, solve_burgers
from .diagnostics import convergence_study, level_errors, theorem1_check
from .diffusion import solve_diffusion
from .grid import GridHierarchy, level_error, restrict
from .problems import SolverProblem
from .synthetic import synthetic_2d_sample

__all__ = [
    "GridHierarchy",
    "Solution",
    "SolverProblem",
    "convergence_study",
    "discrete_advection_diffusion",
    "exact_advection_diffusion",
    "level_error",
    "level_errors",
    "newton_burgers",
    "restrict",
    "solve_advection_diffusion",
    "solve_burgers",
    "solve_diffusion",
    "synthetic_2d_sample",
    "theorem1_check",
]
