"""
Solver diagnostics

Grid-convergence studies with observed orders, inter-level errors on the
coarsest grid, and the similarity check between consecutive level errors:
for a scheme of order d, 2**d * e(h/4) should match e(h/2) up to a defect
that shrinks with h.
"""

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import List, Optional, Sequence

import numpy as np

from ..constants import BURGERS_REFERENCE_POINTS, DISCRETIZATION_ORDER
from ..models import FieldSample
from ..utils.exceptions import DegenerateDiagnosticError, MlnnError, ValidationError
from ..utils.logging import get_logger
from ..utils.parallel import parallel_map
from .grid import GridHierarchy, level_error
from .problems import SolverProblem

logger = get_logger(__name__)

DEGENERATE_TOL = 1e-13


def level_fields(
    problem: SolverProblem, z: np.ndarray, hierarchy: GridHierarchy, jobs: int = 1
) -> List[FieldSample]:
    """Restricted solutions u(1)..u(L) at one parameter point."""
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))

    def solve(level: int) -> FieldSample:
        solution = problem.solve(z, hierarchy.intervals(level))
        return FieldSample(z, level, hierarchy.restrict(solution.values, level))

    return parallel_map(solve, list(range(1, hierarchy.n_levels + 1)), jobs)


def level_errors(
    problem: SolverProblem, z: np.ndarray, hierarchy: GridHierarchy, jobs: int = 1
) -> List[np.ndarray]:
    """Inter-level errors e(2)..e(L) on the coarsest grid."""
    fields = level_fields(problem, z, hierarchy, jobs)
    return [level_error(fine, coarse) for coarse, fine in zip(fields, fields[1:])]


def theorem1_check(
    problem: SolverProblem,
    z: np.ndarray,
    hierarchy: GridHierarchy,
    d: int = DISCRETIZATION_ORDER,
    base_level: int = 1,
) -> float:
    """
    Relative defect ||2**d e(h/4) - e(h/2)||_inf / ||e(h/2)||_inf.

    Uses levels base_level..base_level+2 of the hierarchy, where h is the
    spacing of base_level.

    Raises:
        ValidationError: If fewer than three levels are available
        DegenerateDiagnosticError: If e(h/2) vanishes (solution exact on the grids)
    """
    if hierarchy.n_levels < base_level + 2:
        raise ValidationError(
            f"Similarity check needs levels {base_level}..{base_level + 2}, "
            f"hierarchy has {hierarchy.n_levels}"
        )
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    restricted = []
    for level in range(base_level, base_level + 3):
        solution = problem.solve(z, hierarchy.intervals(level))
        restricted.append(hierarchy.restrict(solution.values, level))
    e_half = restricted[1] - restricted[0]
    e_quarter = restricted[2] - restricted[1]
    denominator = float(np.max(np.abs(e_half)))
    if denominator <= DEGENERATE_TOL:
        raise DegenerateDiagnosticError(
            "Inter-level error vanishes; the grids resolve this solution exactly",
            {"z": z.tolist(), "norm": denominator},
        )
    rho = float(np.max(np.abs(2**d * e_quarter - e_half))) / denominator
    logger.debug(f"Similarity defect at N={hierarchy.intervals(base_level)}: {rho:.3e}")
    return rho


@dataclass
class Theorem1Row:
    n: int
    h: float
    rho: float
    error: Optional[str] = None


def theorem1_sweep(
    problem: SolverProblem, z: np.ndarray, n_coarse: int, levels: int
) -> List[Theorem1Row]:
    """Defect for every consecutive level triple of an n_coarse hierarchy."""
    if levels < 3:
        raise ValidationError(f"Need at least 3 levels, got {levels}")
    hierarchy = GridHierarchy(n_coarse, levels)
    rows = []
    for base in range(1, levels - 1):
        n = hierarchy.intervals(base)
        try:
            rho = theorem1_check(problem, z, hierarchy, base_level=base)
            rows.append(Theorem1Row(n, 1.0 / n, rho))
        except MlnnError as e:
            logger.warning(f"Similarity check failed at N={n}: {e}")
            rows.append(Theorem1Row(n, 1.0 / n, math.nan, str(e)))
    return rows


@dataclass
class ConvergenceRow:
    """One grid of a convergence study; order is relative to the previous row."""

    n: int
    error: float
    order: Optional[float] = None
    work: float = 0.0
    message: Optional[str] = None


@dataclass
class ConvergenceStudy:
    rows: List[ConvergenceRow]
    fitted_order: Optional[float]
    reference: str
    reference_n: Optional[int] = None
    notes: List[str] = field(default_factory=list)


def reference_intervals(ns: Sequence[int], minimum: int = BURGERS_REFERENCE_POINTS) -> int:
    """Smallest lcm(ns) * 2**k with at least `minimum` intervals."""
    base = reduce(lambda a, b: a * b // math.gcd(a, b), ns)
    n_ref = base
    while n_ref < minimum:
        n_ref *= 2
    return n_ref


def fitted_order(ns: Sequence[int], errors: Sequence[float]) -> Optional[float]:
    """Least-squares slope of -log(error) against log(n)."""
    points = [(n, e) for n, e in zip(ns, errors) if np.isfinite(e) and e > 0]
    if len(points) < 2:
        return None
    log_n = np.log([p[0] for p in points])
    log_e = np.log([p[1] for p in points])
    slope, _ = np.polyfit(log_n, log_e, 1)
    return float(-slope)


def convergence_study(
    problem: SolverProblem, z: np.ndarray, ns: Sequence[int]
) -> ConvergenceStudy:
    """
    Max-norm error on each grid against the closed form or a fine reference.

    Problems without a closed form are compared with a reference grid of
    lcm(ns) * 2**k >= 2**15 intervals, restricted to each grid. Failed solves
    are recorded on their row and the study continues.
    """
    ns = sorted(int(n) for n in ns)
    if not ns:
        raise ValidationError("Convergence study needs at least one grid")
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    reference_values = None
    reference_n = None
    if problem.exact(z, np.zeros(1)) is None:
        reference_n = reference_intervals(ns)
        logger.info(f"Reference solve on N={reference_n}")
        reference_values = problem.solve(z, reference_n).values

    rows: List[ConvergenceRow] = []
    for n in ns:
        try:
            solution = problem.solve(z, n)
        except MlnnError as e:
            logger.warning(f"Solve failed on N={n}: {e}")
            rows.append(ConvergenceRow(n, math.nan, message=str(e)))
            continue
        x = np.arange(n + 1) / n
        if reference_values is None:
            truth = problem.exact(z, x)
        else:
            truth = reference_values[:: reference_n // n]
        error = float(np.max(np.abs(solution.values - truth)))
        rows.append(ConvergenceRow(n, error, work=solution.work))

    for previous, row in zip(rows, rows[1:]):
        if previous.error > 0 and row.error > 0 and np.isfinite(previous.error * row.error):
            row.order = math.log(previous.error / row.error) / math.log(row.n / previous.n)

    return ConvergenceStudy(
        rows=rows,
        fitted_order=fitted_order([r.n for r in rows], [r.error for r in rows]),
        reference="exact" if reference_n is None else "fine-grid",
        reference_n=reference_n,
    )
