"""
Solver results and shared tridiagonal helpers
"""

from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from ..utils.exceptions import SingularSystemError


@dataclass
class Solution:
    """A grid solution plus what it cost.

    Attributes:
        values: Solution on the full grid, boundaries included
        iterations: Sweeps over the grid (1 for a direct solve)
        residual_history: Max-norm residual after each Newton iterate
        work: Grid points times sweeps
        continuation_steps: Parameter steps taken before the target (0 if none)
    """

    values: np.ndarray
    iterations: int = 1
    residual_history: List[float] = field(default_factory=list)
    continuation_steps: int = 0

    @property
    def work(self) -> float:
        return float(self.values.size * max(self.iterations, 1))

    @property
    def residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else 0.0


def solve_tridiagonal(
    lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray
) -> np.ndarray:
    """
    Solve a tridiagonal system.

    lower[k] multiplies x[k-1] in row k (lower[0] unused), upper[k]
    multiplies x[k+1] (upper[-1] unused).
    """
    m = len(diag)
    ab = np.zeros((3, m))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    try:
        x = solve_banded((1, 1), ab, rhs)
    except (LinAlgError, ValueError) as e:
        raise SingularSystemError(f"Tridiagonal system is singular: {e}") from e
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("Tridiagonal solve produced non-finite values")
    return x


def tridiagonal_matvec(
    lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, x: np.ndarray
) -> np.ndarray:
    y = diag * x
    y[1:] += lower[1:] * x[:-1]
    y[:-1] += upper[:-1] * x[1:]
    return y
