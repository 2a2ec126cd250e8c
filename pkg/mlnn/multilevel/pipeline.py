"""
MLNN pipeline

run_mlnn builds a surrogate level by level: start with two levels, enrich
and train the top map until its validation error is below epsilon, then add
a level while the top map still predicts corrections above epsilon_acc.
The same module holds the follow-up studies that reuse a built surrogate or
its first levels: held-out errors, extrapolation and the transfer-learning
comparison.
"""

import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from ..constants import CHECKPOINT_TEMPLATE, REPORT_FILE, SAMPLES_TEMPLATE
from ..models import CostLedger
from ..nn.checkpoint import load_network, save_network
from ..solvers.grid import GridHierarchy
from ..solvers.problems import SolverProblem
from ..utils.config import RunConfig
from ..utils.exceptions import ConfigurationError, MlnnError, RunError
from ..utils.io import read_json, write_samples
from ..utils.logging import get_logger
from .evaluation import ErrorRow, accuracy_by_level, evaluate_errors, max_rms_error
from .levels import LevelContext, LevelOutcome, enrich_until_valid
from .sampling import holdout_z
from .surrogate import Surrogate, should_add_level

logger = get_logger(__name__)

STOP_CONVERGED = "corrections-below-epsilon-acc"
STOP_MAX_LEVELS = "max-levels"


@dataclass
class MlnnRun:
    """Everything a run produced."""

    surrogate: Surrogate
    ledger: CostLedger
    outcomes: List[LevelOutcome]
    stop_reason: str
    holdout: List[ErrorRow]
    report: Dict[str, Any]
    wall_seconds: float = 0.0


def problem_report(config: RunConfig) -> Dict[str, Any]:
    return {
        "kind": config.problem.kind,
        "bounds": config.problem.bounds,
        "n_coarse": config.problem.n_coarse,
    }


def level_costs(ledger: CostLedger, n_levels: int) -> List[Dict[str, float]]:
    """Per-level and cumulative build cost on the work basis."""
    rows = []
    cumulative = 0.0
    for level in range(1, n_levels + 1):
        solver = float(ledger.solver_work.get(level, 0.0))
        training = float(ledger.training_work.get(level, 0.0))
        cumulative += solver + training
        rows.append(
            {
                "solver_work": solver,
                "training_work": training,
                "cumulative_cost": cumulative,
            }
        )
    return rows


def build_report(
    config: RunConfig,
    outcomes: List[LevelOutcome],
    ledger: CostLedger,
    stop_reason: str,
    holdout: Optional[List[ErrorRow]] = None,
    wall_seconds: float = 0.0,
) -> Dict[str, Any]:
    """Assemble report.json; everything but "timing" is reproducible."""
    n_levels = 1 + len(outcomes)
    costs = level_costs(ledger, n_levels)
    accuracy = accuracy_by_level(holdout, n_levels) if holdout else [math.nan] * n_levels
    levels: List[Dict[str, Any]] = [
        {"level": 1, "samples": 0, "accuracy": accuracy[0], **costs[0]}
    ]
    for outcome in outcomes:
        entry = outcome.to_dict()
        entry["accuracy"] = accuracy[outcome.level - 1]
        entry.update(costs[outcome.level - 1])
        levels.append(entry)
    report: Dict[str, Any] = {
        "method": "mlnn",
        "problem": problem_report(config),
        "config_hash": config.content_hash(),
        "seed": config.seed,
        "epsilon": config.multilevel.epsilon,
        "epsilon_acc": config.multilevel.epsilon_acc,
        "n_levels": n_levels,
        "stop_reason": stop_reason,
        "levels": levels,
        "cost": ledger.to_dict(),
        "timing": {
            "wall_seconds": wall_seconds,
            "training_seconds": ledger.to_dict(include_timing=True)["training_seconds"],
        },
    }
    if holdout is not None:
        report["holdout"] = {
            "samples": len(holdout),
            "max_rms_error": max_rms_error(holdout),
            "max_error": accuracy[-1],
        }
    return report


def run_mlnn(
    config: RunConfig,
    jobs: Optional[int] = None,
    on_level: Optional[Callable[[LevelOutcome], None]] = None,
) -> MlnnRun:
    """
    Build an MLNN surrogate.

    Args:
        config: Run configuration
        jobs: Worker cap; config.jobs when omitted
        on_level: Called with every finished level (used to save checkpoints)

    Returns:
        MlnnRun with the surrogate, cost ledger, held-out errors and report

    Raises:
        RunError: Wrapping any component failure, with the partial report
    """
    started = time.perf_counter()
    jobs = jobs or config.jobs
    problem = SolverProblem.from_config(config.problem)
    max_levels = config.multilevel.max_levels
    hierarchy = GridHierarchy(config.problem.n_coarse, max_levels)
    ledger = CostLedger()
    surrogate = Surrogate(
        problem,
        hierarchy,
        [],
        config.multilevel.epsilon,
        config.multilevel.epsilon_acc,
    )
    outcomes: List[LevelOutcome] = []
    stop_reason = STOP_MAX_LEVELS
    level = 2
    try:
        while level <= max_levels:
            context = LevelContext(
                problem,
                hierarchy,
                surrogate,
                config,
                ledger,
                config.seed,
                jobs,
                config.training.transfer_learning,
                outcomes[0].hp if outcomes else None,
            )
            outcome = enrich_until_valid(level, context, config.multilevel.epsilon)
            outcomes.append(outcome)
            surrogate.maps.append(outcome.network)
            if on_level is not None:
                on_level(outcome)
            if not should_add_level(
                outcome.network, outcome.dataset.training, config.multilevel.epsilon_acc
            ):
                stop_reason = STOP_CONVERGED
                logger.info(f"Level {level} corrections are below epsilon_acc; stopping")
                break
            logger.info(f"Level {level} still predicts corrections above epsilon_acc")
            level += 1
        holdout = evaluate_errors(
            surrogate.evaluate_levels,
            problem,
            hierarchy,
            surrogate.n_levels,
            holdout_z(problem.bounds, config.multilevel.holdout_samples, config.seed),
            jobs,
        )
    except MlnnError as e:
        partial = build_report(
            config, outcomes, ledger, "failed", wall_seconds=time.perf_counter() - started
        )
        partial["error"] = {"type": type(e).__name__, "message": str(e)}
        raise RunError(f"MLNN run failed on level {level}: {e}", partial, e) from e

    wall = time.perf_counter() - started
    report = build_report(config, outcomes, ledger, stop_reason, holdout, wall)
    logger.info(
        f"MLNN surrogate with {surrogate.n_levels} levels, held-out RMS error "
        f"{report['holdout']['max_rms_error']:.3e}"
    )
    return MlnnRun(surrogate, ledger, outcomes, stop_reason, holdout, report, wall)


def save_level(out_dir: Union[str, Path], outcome: LevelOutcome, seed: int) -> None:
    """Write the checkpoint and sample archive of one finished level."""
    out_dir = Path(out_dir)
    save_network(
        outcome.network,
        out_dir / CHECKPOINT_TEMPLATE.format(level=outcome.level),
        seed,
        {
            "level": outcome.level,
            "hyperparameters": outcome.hp.to_dict(),
            "v_min": outcome.v_min,
            "samples": outcome.dataset.size,
        },
    )
    write_samples(
        out_dir / SAMPLES_TEMPLATE.format(level=outcome.level),
        outcome.dataset.samples.field_samples(),
    )


def load_surrogate(run_dir: Union[str, Path], config: RunConfig) -> Surrogate:
    """Rebuild the surrogate of a finished run from its report and checkpoints."""
    run_dir = Path(run_dir)
    report = read_json(run_dir / REPORT_FILE)
    if report.get("method") != "mlnn":
        raise ConfigurationError(f"{run_dir / REPORT_FILE} is not an MLNN report")
    n_levels = int(report["n_levels"])
    problem = SolverProblem.from_config(config.problem)
    hierarchy = GridHierarchy(config.problem.n_coarse, max(n_levels, 1))
    maps = [
        load_network(run_dir / CHECKPOINT_TEMPLATE.format(level=level))[0]
        for level in range(2, n_levels + 1)
    ]
    return Surrogate(
        problem, hierarchy, maps, config.multilevel.epsilon, config.multilevel.epsilon_acc
    )


def extrapolation_points(bounds: np.ndarray, factors: Sequence[float]) -> np.ndarray:
    """Points beyond the upper corner of the box: upper * factor."""
    return np.stack([bounds[:, 1] * f for f in factors])


def extrapolation_report(
    surrogate: Surrogate, zs: Sequence[np.ndarray], jobs: int = 1
) -> List[ErrorRow]:
    """Surrogate errors at arbitrary points, typically outside the box."""
    return evaluate_errors(
        surrogate.evaluate_levels,
        surrogate.problem,
        surrogate.hierarchy,
        surrogate.n_levels,
        zs,
        jobs,
    )


@dataclass
class TransferRow:
    """Level-3 sample counts with and without transfer learning for one seed."""

    seed: int
    transfer_samples: int
    fresh_samples: int
    transfer_rounds: int
    fresh_rounds: int
    transfer_v_min: float
    fresh_v_min: float
    transfer_trainable: int
    fresh_trainable: int


def transfer_study(
    config: RunConfig, seeds: Sequence[int], jobs: Optional[int] = None
) -> List[TransferRow]:
    """
    Train P(3) by freeze+append and as a fresh full network, per seed.

    Both arms share the level-2 map and draw the same enrichment batches, so
    their level-3 sample counts compare directly. The fresh arm reuses the
    level-2 winning architecture.
    """
    jobs = jobs or config.jobs
    problem = SolverProblem.from_config(config.problem)
    hierarchy = GridHierarchy(config.problem.n_coarse, max(3, config.multilevel.max_levels))
    epsilon = config.multilevel.epsilon
    rows = []
    for seed in seeds:
        base = Surrogate(problem, hierarchy)
        level2 = enrich_until_valid(
            2, LevelContext(problem, hierarchy, base, config, CostLedger(), seed, jobs), epsilon
        )
        arms = {}
        for transfer in (True, False):
            surrogate = Surrogate(problem, hierarchy, [level2.network])
            ledger = CostLedger()
            context = LevelContext(
                problem, hierarchy, surrogate, config, ledger, seed, jobs, transfer, level2.hp
            )
            outcome = enrich_until_valid(3, context, epsilon)
            arms[transfer] = (outcome, ledger.sample_counts.get(3, 0))
        (t_out, t_samples), (f_out, f_samples) = arms[True], arms[False]
        logger.info(
            f"Seed {seed}: level-3 samples with transfer {t_samples}, fresh {f_samples}"
        )
        rows.append(
            TransferRow(
                seed=seed,
                transfer_samples=t_samples,
                fresh_samples=f_samples,
                transfer_rounds=t_out.rounds,
                fresh_rounds=f_out.rounds,
                transfer_v_min=t_out.v_min,
                fresh_v_min=f_out.v_min,
                transfer_trainable=t_out.network.parameter_count(trainable_only=True),
                fresh_trainable=f_out.network.parameter_count(trainable_only=True),
            )
        )
    return rows
