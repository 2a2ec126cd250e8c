"""
Surrogate error evaluation

Both surrogates (MLNN and MLSC) are scored the same way: at each evaluation
point, the partial surrogates of every level are compared in max norm with
the true finest-level solution restricted to X(1). The normalized RMS error
of the full surrogate is reported alongside.
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from ..solvers.grid import GridHierarchy
from ..solvers.problems import SolverProblem
from ..utils.exceptions import MlnnError
from ..utils.io import write_csv
from ..utils.logging import get_logger
from ..utils.parallel import parallel_map
from .surrogate import rms

logger = get_logger(__name__)

LevelFields = Callable[[np.ndarray], List[np.ndarray]]


@dataclass
class ErrorRow:
    """Errors at one evaluation point.

    Attributes:
        z: Parameter point
        inside: Whether z lies in the parameter box
        level_errors: Max-norm error of the L-level surrogate, L = 1..N_L
        rms_error: Normalized RMS error of the full surrogate
        message: Failure description when the point could not be evaluated
    """

    z: np.ndarray
    inside: bool
    level_errors: List[float]
    rms_error: float
    message: Optional[str] = None


def evaluate_errors(
    level_fields: LevelFields,
    problem: SolverProblem,
    hierarchy: GridHierarchy,
    n_levels: int,
    zs: Sequence[np.ndarray],
    jobs: int = 1,
) -> List[ErrorRow]:
    """
    Score a surrogate at every point of zs.

    Args:
        level_fields: z -> [u~(1), ..., u~(N_L)] on X(1)
        problem: Problem supplying the truth solves
        hierarchy: Grid family
        n_levels: N_L, the level of the truth solve
        zs: Evaluation points
        jobs: Worker cap
    """

    def score(z: np.ndarray) -> ErrorRow:
        z = np.atleast_1d(np.asarray(z, dtype=np.float64))
        inside = problem.contains(z)
        try:
            truth = hierarchy.restrict(
                problem.solve(z, hierarchy.intervals(n_levels)).values, n_levels
            )
            fields = level_fields(z)
        except MlnnError as e:
            logger.warning(f"Evaluation failed at z={z.tolist()}: {e}")
            return ErrorRow(z, inside, [math.nan] * n_levels, math.nan, str(e))
        errors = [float(np.max(np.abs(f - truth))) for f in fields]
        return ErrorRow(z, inside, errors, rms(fields[-1] - truth))

    return parallel_map(score, [np.asarray(z) for z in zs], jobs)


def accuracy_by_level(rows: Sequence[ErrorRow], n_levels: int) -> List[float]:
    """Largest finite error over the in-box rows, per level."""
    accuracy = []
    for k in range(n_levels):
        values = [
            r.level_errors[k]
            for r in rows
            if r.inside and k < len(r.level_errors) and np.isfinite(r.level_errors[k])
        ]
        accuracy.append(max(values) if values else math.nan)
    return accuracy


def max_rms_error(rows: Sequence[ErrorRow]) -> float:
    values = [r.rms_error for r in rows if r.inside and np.isfinite(r.rms_error)]
    return max(values) if values else math.nan


def write_errors_csv(
    path: Union[str, Path], rows: Sequence[ErrorRow], dim: int, n_levels: int
) -> Path:
    """One row per evaluation point: z, inside flag, per-level errors, RMS error."""
    headers = (
        [f"z{k + 1}" for k in range(dim)]
        + ["inside"]
        + [f"level{k + 1}_error" for k in range(n_levels)]
        + ["rms_error", "message"]
    )
    table = []
    for row in rows:
        errors = list(row.level_errors) + [math.nan] * (n_levels - len(row.level_errors))
        table.append(
            [float(v) for v in row.z]
            + [int(row.inside)]
            + [float(e) for e in errors[:n_levels]]
            + [row.rms_error, row.message or ""]
        )
    return write_csv(path, headers, table)
