"""
Per-level training

train_level fits one error map, grid_search fits one map per hyperparameter
cell and keeps the best, and enrich_until_valid alternates grid searches
with drawing more samples until the best validation error drops below the
training threshold. Level 2 trains fresh networks; higher levels freeze the
previous map and train an appended dense layer plus a new head.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .. import constants as C
from ..models import CostLedger
from ..nn.network import ErrorMapNetwork, append_fc_layer, build_network
from ..nn.training import TrainConfig, TrainingResult, train
from ..solvers.grid import GridHierarchy
from ..solvers.problems import SolverProblem
from ..utils.config import RunConfig, TrainingConfig
from ..utils.exceptions import (
    EnrichmentError,
    GridSearchError,
    TrainingDivergenceError,
    ValidationError,
)
from ..utils.logging import get_logger
from ..utils.parallel import parallel_map, task_seed
from .dataset import LevelDataset, LevelSamples, collect_samples
from .hyperparameters import Hyperparameters, level2_grid, transfer_grid
from .sampling import batch_size, sample_z
from .surrogate import Surrogate

logger = get_logger(__name__)

Z_STREAM = 1
SPLIT_STREAM = 2


def network_input_shape(dataset: LevelDataset) -> Tuple[int, ...]:
    """[channels, *spatial] of the dataset's fields."""
    shape = tuple(dataset.training.fields.shape[1:])
    return (1,) + shape if len(shape) == 1 else shape


def train_level(
    level: int,
    dataset: LevelDataset,
    hp: Hyperparameters,
    prev: Optional[ErrorMapNetwork],
    cfg: TrainingConfig,
    seed: int,
    warm_start: Optional[ErrorMapNetwork] = None,
) -> TrainingResult:
    """
    Train the level-`level` error map for one hyperparameter cell.

    Args:
        level: Level i >= 2
        dataset: Training and validation pairs
        hp: Cell; transfer cells extend prev, others build a fresh network
        prev: Trained P(i-1), required for transfer cells
        cfg: Optimizer settings
        seed: Initialization seed
        warm_start: Network from the previous enrichment round to continue from

    Raises:
        TrainingDivergenceError: With hp attached
    """
    if level < 2:
        raise ValidationError(f"Error maps start at level 2, got {level}")
    if warm_start is not None:
        net = warm_start
    elif hp.transfer:
        if prev is None:
            raise ValidationError(f"Level {level} transfer training needs P({level - 1})")
        net = append_fc_layer(prev, hp.width, seed)
    else:
        net = build_network(
            network_input_shape(dataset),
            dataset.training.zs.shape[1],
            hp.n_cnn,
            hp.n_fc,
            hp.width,
            seed,
            cfg.filters_first_layer,
        )
    train_cfg = TrainConfig(
        lam=hp.lam,
        max_epochs=cfg.max_epochs,
        learning_rate=cfg.learning_rate,
        seed=seed,
        plateau_patience=cfg.plateau_patience,
        plateau_tolerance=cfg.plateau_tolerance,
    )
    return train(net, dataset.training, dataset.validation, train_cfg, hp.to_dict())


@dataclass
class CellResult:
    hp: Hyperparameters
    result: Optional[TrainingResult]
    error: Optional[str] = None

    @property
    def validation_error(self) -> float:
        return self.result.validation_error if self.result else math.inf

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"hyperparameters": self.hp.to_dict()}
        if self.result is None:
            data["error"] = self.error
        else:
            data["validation_error"] = self.result.validation_error
            data["raw_validation_error"] = self.result.raw_validation_error
            data["epochs"] = self.result.epochs
        return data


@dataclass
class GridSearchResult:
    """Best cell of one grid search plus every cell's outcome."""

    network: ErrorMapNetwork
    hp: Hyperparameters
    v_min: float
    cells: List[CellResult]

    def networks(self) -> Dict[Hyperparameters, ErrorMapNetwork]:
        return {c.hp: c.result.network for c in self.cells if c.result is not None}


def search_grid(
    level: int, config: RunConfig, base_hp: Optional[Hyperparameters], transfer: bool
) -> List[Hyperparameters]:
    """Cells to search on a level."""
    n_coarse = config.problem.n_coarse
    if level == 2:
        return level2_grid(config.search, n_coarse)
    if transfer:
        return transfer_grid(config.search, n_coarse)
    if base_hp is None:
        raise ValidationError("Fresh higher-level networks need the level-2 architecture")
    return [
        Hyperparameters(lam, base_hp.n_cnn, base_hp.n_fc, base_hp.width)
        for lam in config.search.transfer_lambdas
    ]


def grid_search(
    level: int,
    dataset: LevelDataset,
    prev: Optional[ErrorMapNetwork],
    config: RunConfig,
    seed: int,
    grid: Optional[List[Hyperparameters]] = None,
    warm_starts: Optional[Dict[Hyperparameters, ErrorMapNetwork]] = None,
    ledger: Optional[CostLedger] = None,
    jobs: int = 1,
) -> GridSearchResult:
    """
    Train one network per cell and keep the smallest validation error.

    Ties go to the smaller trainable-parameter count, then to the smaller
    (lambda, n_cnn, n_fc, width) tuple.

    Raises:
        GridSearchError: If every cell diverged
    """
    if grid is None:
        grid = search_grid(level, config, None, transfer=True)
    warm_starts = warm_starts or {}

    def run_cell(job: Tuple[int, Hyperparameters]) -> CellResult:
        index, hp = job
        try:
            result = train_level(
                level,
                dataset,
                hp,
                prev,
                config.training,
                task_seed(seed, level, index),
                warm_starts.get(hp),
            )
        except TrainingDivergenceError as e:
            logger.warning(f"Level {level} cell {hp.label()} diverged: {e}")
            return CellResult(hp, None, str(e))
        logger.debug(
            f"Level {level} cell {hp.label()}: v={result.validation_error:.3e} "
            f"(raw {result.raw_validation_error:.3e}, {result.epochs} epochs)"
        )
        return CellResult(hp, result)

    cells = parallel_map(run_cell, list(enumerate(grid)), jobs)
    if ledger is not None:
        for cell in cells:
            if cell.result is not None:
                ledger.charge_training(level, cell.result.work, cell.result.seconds)

    trained = [c for c in cells if c.result is not None]
    if not trained:
        raise GridSearchError(
            f"Every hyperparameter cell diverged on level {level}",
            [c.to_dict() for c in cells],
        )
    best = min(
        trained,
        key=lambda c: (
            c.validation_error,
            c.result.network.parameter_count(trainable_only=True),
            c.hp.sort_key(),
        ),
    )
    logger.info(f"Level {level}: best {best.hp.label()} with v_min={best.validation_error:.3e}")
    return GridSearchResult(best.result.network, best.hp, best.validation_error, cells)


@dataclass
class LevelContext:
    """What enrich_until_valid needs besides the level and threshold.

    Attributes:
        problem: Parametric problem
        hierarchy: Grid family
        surrogate: Partial surrogate with maps up to level i-1
        config: Run configuration
        ledger: Cost ledger to charge
        seed: Root seed
        jobs: Worker cap
        transfer: Extend the previous map (True) or train full networks
        base_hp: Winning level-2 cell, used when transfer is off
    """

    problem: SolverProblem
    hierarchy: GridHierarchy
    surrogate: Surrogate
    config: RunConfig
    ledger: CostLedger
    seed: int
    jobs: int = 1
    transfer: bool = True
    base_hp: Optional[Hyperparameters] = None

    @property
    def prev(self) -> Optional[ErrorMapNetwork]:
        if not self.surrogate.maps:
            return None
        last = self.surrogate.maps[-1]
        return last if isinstance(last, ErrorMapNetwork) else None


@dataclass
class LevelOutcome:
    """Result of enrich_until_valid for one level."""

    level: int
    network: ErrorMapNetwork
    hp: Hyperparameters
    dataset: LevelDataset
    v_history: List[float]
    cells: List[CellResult] = field(default_factory=list)

    @property
    def rounds(self) -> int:
        return len(self.v_history)

    @property
    def v_min(self) -> float:
        return self.v_history[-1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "level": self.level,
            "samples": self.dataset.size,
            "training_samples": len(self.dataset.training),
            "validation_samples": len(self.dataset.validation),
            "z": [z.tolist() for z in self.dataset.samples.z],
            "v_history": self.v_history,
            "v_min": self.v_min,
            "rounds": self.rounds,
            "hyperparameters": self.hp.to_dict(),
            "trainable_parameters": self.network.parameter_count(trainable_only=True),
            "total_parameters": self.network.parameter_count(),
            "grid": [c.to_dict() for c in self.cells],
        }


def enrich_until_valid(level: int, context: LevelContext, epsilon: float) -> LevelOutcome:
    """
    Grid-search, and while v_min >= epsilon draw a new batch and retrain.

    Level 2 draws 10**dim samples per round, higher levels 2**dim. Every
    round re-splits all samples 80/20 and warm-starts each cell from its
    network of the previous round.

    Raises:
        EnrichmentError: After config.multilevel.max_rounds rounds without success
    """
    if epsilon <= 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    config = context.config
    dim = context.problem.dimension
    per_round = batch_size(level, dim)
    grid = search_grid(level, config, context.base_hp, context.transfer)
    samples = LevelSamples(level)
    warm: Dict[Hyperparameters, ErrorMapNetwork] = {}
    v_history: List[float] = []

    for round_index in range(1, config.multilevel.max_rounds + 1):
        new_z = sample_z(
            context.problem.bounds,
            per_round,
            task_seed(context.seed, level, round_index, Z_STREAM),
        )
        samples.extend(
            collect_samples(
                level,
                new_z,
                context.problem,
                context.hierarchy,
                context.surrogate,
                context.ledger,
                context.jobs,
            )
        )
        dataset = LevelDataset.from_samples(
            samples, task_seed(context.seed, level, round_index, SPLIT_STREAM)
        )
        result = grid_search(
            level,
            dataset,
            context.prev,
            config,
            context.seed,
            grid=grid,
            warm_starts=warm,
            ledger=context.ledger,
            jobs=context.jobs,
        )
        warm = result.networks()
        if v_history and result.v_min > min(v_history) * (1.0 + C.MONOTONE_TOLERANCE):
            logger.warning(
                f"Level {level} round {round_index}: v_min rose to {result.v_min:.3e} "
                f"from {min(v_history):.3e}"
            )
        v_history.append(result.v_min)
        logger.info(
            f"Level {level} round {round_index}: {dataset.size} samples, "
            f"v_min={result.v_min:.3e} (epsilon {epsilon:.1e})"
        )
        if result.v_min < epsilon:
            return LevelOutcome(
                level, result.network, result.hp, dataset, v_history, result.cells
            )

    raise EnrichmentError(
        f"Level {level} did not reach v_min < {epsilon:g} in "
        f"{config.multilevel.max_rounds} rounds",
        level,
        v_history,
    )
