"""
Multi-level surrogate

One coarse solve followed by the chain of error maps:

    u~(1) = u(1)(z)|X1,   u~(i) = u~(i-1) + P(i)(u~(i-1), z),  i = 2..N_L

Any object with predict(field, z) can serve as an error map, which lets
tests plug in the true inter-level errors.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Protocol, Tuple

import numpy as np

from ..models import CostLedger
from ..solvers.grid import GridHierarchy
from ..solvers.problems import SolverProblem
from ..utils.logging import get_logger

logger = get_logger(__name__)


class ErrorMap(Protocol):
    def predict(self, field: np.ndarray, z: np.ndarray) -> np.ndarray:
        ...


@dataclass
class Surrogate:
    """Coarse solver plus trained maps P(2)..P(N_L).

    Attributes:
        problem: Parametric problem providing the coarse solve
        hierarchy: Grid family; level 1 is the coarse grid
        maps: Error maps in level order, maps[k] is P(k+2)
        epsilon: Training threshold the maps were built with
        epsilon_acc: Accuracy threshold of the level criterion
        ledger: Charged once per evaluation
    """

    problem: SolverProblem
    hierarchy: GridHierarchy
    maps: List[ErrorMap] = field(default_factory=list)
    epsilon: float = 0.0
    epsilon_acc: float = 0.0
    ledger: Optional[CostLedger] = None

    @property
    def n_levels(self) -> int:
        return 1 + len(self.maps)

    def truncated(self, n_levels: int) -> "Surrogate":
        """Surrogate using only the first n_levels levels."""
        return Surrogate(
            self.problem,
            self.hierarchy,
            list(self.maps[: n_levels - 1]),
            self.epsilon,
            self.epsilon_acc,
            self.ledger,
        )

    def coarse(self, z: np.ndarray) -> Tuple[np.ndarray, float]:
        """Restricted level-1 solve and its work."""
        solution = self.problem.solve(z, self.hierarchy.intervals(1))
        return self.hierarchy.restrict(solution.values, 1), solution.work

    def evaluate_levels(self, z: np.ndarray) -> List[np.ndarray]:
        """u~(1)..u~(N_L) at z."""
        z = np.atleast_1d(np.asarray(z, dtype=np.float64))
        if not self.problem.contains(z):
            logger.warning(f"z={z.tolist()} lies outside the parameter box; extrapolating")
        current, _ = self.coarse(z)
        fields = [current]
        for error_map in self.maps:
            current = current + error_map.predict(current, z)
            fields.append(current)
        if self.ledger is not None:
            self.ledger.charge_evaluation(len(self.maps))
        return fields

    def evaluate_detailed(self, z: np.ndarray) -> Tuple[np.ndarray, float]:
        """u~(N_L) at z together with the coarse-solve work."""
        z = np.atleast_1d(np.asarray(z, dtype=np.float64))
        current, work = self.coarse(z)
        for error_map in self.maps:
            current = current + error_map.predict(current, z)
        return current, work

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        return self.evaluate_levels(z)[-1]


def surrogate_eval(surrogate: Surrogate, z: np.ndarray) -> np.ndarray:
    """Surrogate field on X(1) at z."""
    return surrogate.evaluate(z)


def rms(values: np.ndarray) -> float:
    """Grid-normalized norm ||x||_2 / sqrt(len(x))."""
    values = np.asarray(values, dtype=np.float64).ravel()
    return float(np.linalg.norm(values) / np.sqrt(values.size))


def should_add_level(error_map: ErrorMap, training, epsilon_acc: float) -> bool:
    """
    True when any training input gets a correction with RMS above epsilon_acc.

    Args:
        error_map: Top-level map P(N_L)
        training: Batch of training pairs T(N_L)
        epsilon_acc: Accuracy threshold
    """
    for field_in, z in zip(training.fields, training.zs):
        if rms(error_map.predict(field_in, z)) > epsilon_acc:
            return True
    return False
