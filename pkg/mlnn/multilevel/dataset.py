"""
Level datasets

A level-i dataset pairs the coarse-grid input field u(i-1)|X1 (a true solve
on level 2, the partial surrogate's prediction above) with the true
u(i)|X1 for each parameter point. The network learns the difference. Samples
are split 80/20 into training and validation sets with a seeded shuffle.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..constants import VALIDATION_FRACTION
from ..models import CostLedger, FieldSample
from ..nn.network import Batch
from ..solvers.grid import GridHierarchy
from ..solvers.problems import SolverProblem
from ..utils.exceptions import MlnnError, ValidationError
from ..utils.logging import get_logger
from ..utils.parallel import parallel_map
from .surrogate import Surrogate

logger = get_logger(__name__)


def split_indices(count: int, seed: int):
    """Seeded 80/20 split; the validation part has at least one sample."""
    if count < 2:
        raise ValidationError(f"Need at least 2 samples to split, got {count}")
    n_val = max(1, math.ceil(VALIDATION_FRACTION * count))
    order = np.random.default_rng(seed).permutation(count)
    return np.sort(order[n_val:]), np.sort(order[:n_val])


@dataclass
class LevelSamples:
    """Accumulated (z, input, solution) records of one level."""

    level: int
    z: List[np.ndarray] = field(default_factory=list)
    inputs: List[np.ndarray] = field(default_factory=list)
    solutions: List[np.ndarray] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.z)

    def extend(self, other: "LevelSamples") -> None:
        self.z.extend(other.z)
        self.inputs.extend(other.inputs)
        self.solutions.extend(other.solutions)

    def field_samples(self) -> List[FieldSample]:
        return [
            FieldSample(z, self.level, u) for z, u in zip(self.z, self.solutions)
        ]


@dataclass
class LevelDataset:
    """Training and validation pairs of one level.

    Attributes:
        level: Level i >= 2
        training: Pairs T(i); targets are u(i)|X1 - input
        validation: Pairs V(i)
        samples: All records the split was made from
        train_index: Record indices in T(i)
        validation_index: Record indices in V(i)
    """

    level: int
    training: Batch
    validation: Batch
    samples: LevelSamples
    train_index: np.ndarray
    validation_index: np.ndarray

    @property
    def size(self) -> int:
        return len(self.samples)

    @classmethod
    def from_samples(cls, samples: LevelSamples, seed: int) -> "LevelDataset":
        inputs = np.stack(samples.inputs)
        solutions = np.stack(samples.solutions)
        zs = np.stack(samples.z)
        full = Batch(inputs, zs, solutions - inputs)
        train_index, validation_index = split_indices(len(samples), seed)
        return cls(
            level=samples.level,
            training=full.subset(train_index),
            validation=full.subset(validation_index),
            samples=samples,
            train_index=train_index,
            validation_index=validation_index,
        )


def collect_samples(
    level: int,
    z_list: np.ndarray,
    problem: SolverProblem,
    hierarchy: GridHierarchy,
    surrogate: Surrogate,
    ledger: Optional[CostLedger] = None,
    jobs: int = 1,
) -> LevelSamples:
    """
    Solve for every z: the input from the partial surrogate, the target on level i.

    Every solve is charged to `level` in the ledger.

    Raises:
        MlnnError: The solver failure, with the offending z in its details
    """
    if level < 2:
        raise ValidationError(f"Datasets start at level 2, got {level}")
    if surrogate.n_levels != level - 1:
        raise ValidationError(
            f"Level-{level} inputs need a {level - 1}-level surrogate, "
            f"got {surrogate.n_levels} levels"
        )

    def solve(z: np.ndarray):
        try:
            field_in, coarse_work = surrogate.evaluate_detailed(z)
            fine = problem.solve(z, hierarchy.intervals(level))
        except MlnnError as e:
            e.details.setdefault("z", np.asarray(z).tolist())
            e.details.setdefault("level", level)
            raise
        return z, field_in, hierarchy.restrict(fine.values, level), coarse_work, fine.work

    results = parallel_map(solve, [np.asarray(z, dtype=np.float64) for z in z_list], jobs)
    samples = LevelSamples(level)
    for z, field_in, target, coarse_work, fine_work in results:
        samples.z.append(z)
        samples.inputs.append(field_in)
        samples.solutions.append(target)
        if ledger is not None:
            ledger.charge_solve(level, coarse_work)
            ledger.charge_solve(level, fine_work)
    if ledger is not None:
        ledger.charge_samples(level, len(samples))
    logger.debug(f"Level {level}: solved {len(samples)} new samples")
    return samples


def build_level_dataset(
    level: int,
    z_list: np.ndarray,
    problem: SolverProblem,
    hierarchy: GridHierarchy,
    surrogate: Surrogate,
    ledger: Optional[CostLedger] = None,
    seed: int = 0,
    jobs: int = 1,
) -> LevelDataset:
    """Solve for z_list and split the pairs 80/20."""
    samples = collect_samples(level, z_list, problem, hierarchy, surrogate, ledger, jobs)
    return LevelDataset.from_samples(samples, seed)
