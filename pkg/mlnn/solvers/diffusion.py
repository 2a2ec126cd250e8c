"""
Pure diffusion, the Re -> 0 limit of advection-diffusion

    -u'' = 0 on [0, 1],  u(0) = 0,  u(1) = 1

The exact solution u = x is reproduced by the stencil on every grid, so all
inter-level errors vanish up to round-off. It serves as the trivial problem.
"""

import numpy as np

from ..utils.exceptions import ValidationError
from .base import Solution, solve_tridiagonal


def diffusion_solution(n: int) -> Solution:
    if n < 2:
        raise ValidationError(f"Need at least 2 intervals, got {n}")
    m = n - 1
    rhs = np.zeros(m)
    rhs[-1] = 1.0
    interior = solve_tridiagonal(np.full(m, -1.0), np.full(m, 2.0), np.full(m, -1.0), rhs)
    values = np.concatenate([[0.0], interior, [1.0]])
    return Solution(values=values, iterations=1, residual_history=[0.0])


def solve_diffusion(n: int) -> np.ndarray:
    """Solution vector of length n + 1."""
    return diffusion_solution(n).values
