"""
Steady advection-diffusion

    u' - u''/Re = 0 on [0, 1],  u(0) = 0,  u(1) = 1

Central differences on N intervals give a tridiagonal system for the
interior points; the Dirichlet value at x = 1 moves to the right-hand side.
Rows are multiplied by dx**2 so coefficients stay O(1).
"""

import numpy as np

from ..constants import MAX_CELL_REYNOLDS, SOLVER_RESIDUAL_LIMIT
from ..utils.exceptions import SolverError, ValidationError
from ..utils.logging import get_logger
from .base import Solution, solve_tridiagonal, tridiagonal_matvec

logger = get_logger(__name__)


def cell_reynolds(re: float, n: int) -> float:
    """Re * dx for an N-interval grid."""
    return re / n


def check_cell_reynolds(re: float, n: int) -> None:
    """Raise ValidationError unless Re * dx < 2."""
    if re <= 0:
        raise ValidationError(f"Reynolds number must be positive, got {re}")
    if n < 2:
        raise ValidationError(f"Need at least 2 intervals, got {n}")
    if cell_reynolds(re, n) >= MAX_CELL_REYNOLDS:
        raise ValidationError(
            f"Cell Reynolds number {cell_reynolds(re, n):.3g} >= {MAX_CELL_REYNOLDS} "
            f"(Re={re}, N={n}); refine the grid",
            {"re": re, "n": n},
        )


def _assemble(re: float, n: int):
    dx = 1.0 / n
    m = n - 1
    lower = np.full(m, -dx / 2.0 - 1.0 / re)
    diag = np.full(m, 2.0 / re)
    upper = np.full(m, dx / 2.0 - 1.0 / re)
    rhs = np.zeros(m)
    rhs[-1] = -upper[-1]
    return lower, diag, upper, rhs


def advection_diffusion_solution(re: float, n: int) -> Solution:
    """Direct solve; returns the full-grid Solution."""
    check_cell_reynolds(re, n)
    lower, diag, upper, rhs = _assemble(re, n)
    interior = solve_tridiagonal(lower, diag, upper, rhs)
    residual = float(
        np.max(np.abs(tridiagonal_matvec(lower, diag, upper, interior) - rhs))
    )
    if residual > SOLVER_RESIDUAL_LIMIT:
        raise SolverError(
            f"Advection-diffusion residual {residual:.3e} too large",
            {"re": re, "n": n, "residual": residual},
        )
    values = np.concatenate([[0.0], interior, [1.0]])
    return Solution(values=values, iterations=1, residual_history=[residual])


def solve_advection_diffusion(re: float, n: int) -> np.ndarray:
    """Solution vector of length n + 1 with u[0] = 0 and u[n] = 1."""
    return advection_diffusion_solution(re, n).values


def exact_advection_diffusion(x, re: float):
    """
    Closed form (exp(x Re) - 1) / (exp(Re) - 1).

    Evaluated as exp((x-1) Re) (1 - exp(-x Re)) / (1 - exp(-Re)) so large Re
    does not overflow.
    """
    if re <= 0:
        raise ValidationError(f"Reynolds number must be positive, got {re}")
    x = np.asarray(x, dtype=np.float64)
    value = np.exp((x - 1.0) * re) * (-np.expm1(-x * re)) / (-np.expm1(-re))
    return float(value) if value.ndim == 0 else value


def discrete_advection_diffusion(re: float, n: int) -> np.ndarray:
    """
    Exact solution of the discrete central scheme.

    The recurrence has roots 1 and r = (1 + P) / (1 - P) with P = Re dx / 2,
    so u_j = (r**j - 1) / (r**n - 1).
    """
    check_cell_reynolds(re, n)
    p = re / (2.0 * n)
    log_r = np.log1p(p) - np.log1p(-p)
    j = np.arange(n + 1)
    return np.exp((j - n) * log_r) * (-np.expm1(-j * log_r)) / (-np.expm1(-n * log_r))
