"""
Multi-level stochastic collocation

Each PDE level i gets its own collocation grid for the inter-level
difference e(i) (level 1 interpolates u(1) itself). A level's grid is refined
until the hierarchical surplus, the RMS mismatch at the newly added nodes
between the data and the coarser interpolant, drops below epsilon; the
finer grid, whose nodes are already solved, is then kept. Node solves are
cached, so refining only solves at new nodes. The surrogate is the sum of
the per-level interpolants.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..models import CostLedger
from ..multilevel.evaluation import ErrorRow, accuracy_by_level, evaluate_errors, max_rms_error
from ..multilevel.pipeline import level_costs, problem_report
from ..multilevel.sampling import holdout_z
from ..multilevel.surrogate import rms
from ..solvers.grid import GridHierarchy
from ..solvers.problems import SolverProblem
from ..utils.config import MlscConfig, RunConfig
from ..utils.exceptions import CollocationError, MlnnError, RunError
from ..utils.logging import get_logger
from ..utils.parallel import parallel_map
from .collocation import CollocationGrid

logger = get_logger(__name__)

Node = Tuple[float, ...]


@dataclass
class MlscLevel:
    """Converged interpolant of one PDE level.

    Attributes:
        level: PDE level i
        grid: Kept collocation grid
        values: Nodal data [*grid.shape, N1+1]
        surplus_history: Surplus measured at each refinement
        nodes_solved: Distinct nodes evaluated, including the rejected refinement
    """

    level: int
    grid: CollocationGrid
    values: np.ndarray
    surplus_history: List[float] = field(default_factory=list)
    nodes_solved: int = 0

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        return self.grid.interpolate(self.values, z)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "level": self.level,
            "cc_level": self.grid.cc_level,
            "nodes": int(np.prod(self.grid.shape)),
            "samples": self.nodes_solved,
            "surplus_history": self.surplus_history,
        }


@dataclass
class MlscSurrogate:
    """Sum of per-level interpolants."""

    problem: SolverProblem
    hierarchy: GridHierarchy
    levels: List[MlscLevel] = field(default_factory=list)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def evaluate_levels(self, z: np.ndarray) -> List[np.ndarray]:
        """Partial sums u~(1)..u~(N_L) at z."""
        z = np.atleast_1d(np.asarray(z, dtype=np.float64))
        if not self.problem.contains(z):
            logger.warning(f"z={z.tolist()} lies outside the parameter box; extrapolating")
        total = None
        sums = []
        for level in self.levels:
            part = level.evaluate(z)
            total = part if total is None else total + part
            sums.append(total)
        return sums

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        return self.evaluate_levels(z)[-1]


def mlsc_eval(surrogate: MlscSurrogate, z: np.ndarray) -> np.ndarray:
    """Sum of the per-level interpolants at z."""
    return surrogate.evaluate(z)


def _level_data(
    problem: SolverProblem, hierarchy: GridHierarchy, level: int, ledger: Optional[CostLedger]
):
    def data(node: Node) -> np.ndarray:
        z = np.asarray(node, dtype=np.float64)
        try:
            fine = problem.solve(z, hierarchy.intervals(level))
            restricted = hierarchy.restrict(fine.values, level)
            work = [fine.work]
            if level > 1:
                coarse = problem.solve(z, hierarchy.intervals(level - 1))
                restricted = restricted - hierarchy.restrict(coarse.values, level - 1)
                work.append(coarse.work)
        except MlnnError as e:
            e.details.setdefault("z", list(node))
            e.details.setdefault("level", level)
            raise
        if ledger is not None:
            for w in work:
                ledger.charge_solve(level, w)
        return restricted

    return data


def build_level(
    problem: SolverProblem,
    hierarchy: GridHierarchy,
    level: int,
    config: MlscConfig,
    ledger: Optional[CostLedger] = None,
    jobs: int = 1,
) -> MlscLevel:
    """
    Refine one level's collocation grid until the surplus is below epsilon.

    Raises:
        CollocationError: If config.max_cc_level refinements do not suffice
    """
    data = _level_data(problem, hierarchy, level, ledger)
    cache: Dict[Node, np.ndarray] = {}

    def fill(grid: CollocationGrid) -> List[Node]:
        new = [p for p in grid.points() if p not in cache]
        for node, value in zip(new, parallel_map(data, new, jobs)):
            cache[node] = value
        return new

    def nodal_values(grid: CollocationGrid) -> np.ndarray:
        stacked = np.stack([cache[p] for p in grid.points()])
        return stacked.reshape(grid.shape + stacked.shape[1:])

    grid = CollocationGrid(0, problem.bounds)
    fill(grid)
    values = nodal_values(grid)
    history: List[float] = []
    for m in range(1, config.max_cc_level + 1):
        finer = CollocationGrid(m, problem.bounds)
        new = fill(finer)
        surplus = max(rms(cache[p] - grid.interpolate(values, np.asarray(p))) for p in new)
        history.append(surplus)
        logger.debug(f"MLSC level {level}, cc level {m}: surplus {surplus:.3e}")
        grid, values = finer, nodal_values(finer)
        if surplus < config.epsilon:
            if ledger is not None:
                ledger.charge_samples(level, len(cache))
            logger.info(
                f"MLSC level {level}: kept cc level {grid.cc_level} "
                f"({len(cache)} node solves)"
            )
            return MlscLevel(level, grid, values, history, len(cache))
    raise CollocationError(
        f"MLSC level {level} surplus still {history[-1]:.3e} at cc level "
        f"{config.max_cc_level}",
        {"level": level, "surplus_history": history},
    )


def build_mlsc(
    problem: SolverProblem,
    hierarchy: GridHierarchy,
    config: MlscConfig,
    ledger: Optional[CostLedger] = None,
    jobs: int = 1,
) -> MlscSurrogate:
    """Build every level of the hierarchy."""
    surrogate = MlscSurrogate(problem, hierarchy)
    for level in range(1, hierarchy.n_levels + 1):
        surrogate.levels.append(build_level(problem, hierarchy, level, config, ledger, jobs))
    return surrogate


@dataclass
class MlscRun:
    surrogate: MlscSurrogate
    ledger: CostLedger
    holdout: List[ErrorRow]
    report: Dict[str, Any]
    wall_seconds: float = 0.0


def mlsc_levels(config: RunConfig) -> int:
    return config.mlsc.n_levels or config.multilevel.max_levels


def build_mlsc_report(
    config: RunConfig,
    surrogate: MlscSurrogate,
    ledger: CostLedger,
    holdout: Optional[List[ErrorRow]],
    wall_seconds: float,
    stop_reason: str = "complete",
) -> Dict[str, Any]:
    n_levels = surrogate.n_levels
    costs = level_costs(ledger, n_levels)
    accuracy = accuracy_by_level(holdout, n_levels) if holdout else [math.nan] * n_levels
    levels = []
    for level, cost, acc in zip(surrogate.levels, costs, accuracy):
        entry = level.to_dict()
        entry["accuracy"] = acc
        entry.update(cost)
        levels.append(entry)
    report: Dict[str, Any] = {
        "method": "mlsc",
        "problem": problem_report(config),
        "config_hash": config.content_hash(),
        "seed": config.seed,
        "epsilon": config.mlsc.epsilon,
        "n_levels": n_levels,
        "stop_reason": stop_reason,
        "levels": levels,
        "cost": ledger.to_dict(),
        "timing": {"wall_seconds": wall_seconds},
    }
    if holdout is not None:
        report["holdout"] = {
            "samples": len(holdout),
            "max_rms_error": max_rms_error(holdout),
            "max_error": accuracy[-1] if accuracy else math.nan,
        }
    return report


def run_mlsc(config: RunConfig, jobs: Optional[int] = None) -> MlscRun:
    """
    Build the MLSC baseline and score it on the MLNN held-out points.

    Raises:
        RunError: Wrapping any component failure, with the partial report
    """
    started = time.perf_counter()
    jobs = jobs or config.jobs
    problem = SolverProblem.from_config(config.problem)
    hierarchy = GridHierarchy(config.problem.n_coarse, mlsc_levels(config))
    ledger = CostLedger()
    surrogate = MlscSurrogate(problem, hierarchy)
    try:
        for level in range(1, hierarchy.n_levels + 1):
            surrogate.levels.append(
                build_level(problem, hierarchy, level, config.mlsc, ledger, jobs)
            )
        holdout = evaluate_errors(
            surrogate.evaluate_levels,
            problem,
            hierarchy,
            surrogate.n_levels,
            holdout_z(problem.bounds, config.multilevel.holdout_samples, config.seed),
            jobs,
        )
    except MlnnError as e:
        partial = build_mlsc_report(
            config, surrogate, ledger, None, time.perf_counter() - started, "failed"
        )
        partial["error"] = {"type": type(e).__name__, "message": str(e)}
        raise RunError(f"MLSC run failed: {e}", partial, e) from e
    wall = time.perf_counter() - started
    report = build_mlsc_report(config, surrogate, ledger, holdout, wall)
    return MlscRun(surrogate, ledger, holdout, report, wall)
