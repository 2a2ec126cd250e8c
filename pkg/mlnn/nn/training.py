"""
Network training

Full-batch Adam on the penalized sum-of-squares loss, stopped at the epoch
cap or when the best training loss stops improving. The returned network
carries the weights of the lowest training loss seen. The validation error is
the mean over validation samples of the per-point squared error, so a
threshold keeps its meaning as the sample set grows.
"""

import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..constants import (
    LEARNING_RATE,
    MAX_EPOCHS,
    PLATEAU_PATIENCE,
    PLATEAU_TOLERANCE,
)
from ..utils.exceptions import TrainingDivergenceError, ValidationError
from ..utils.logging import get_logger
from .network import Batch, ErrorMapNetwork, loss_and_gradients
from .optim import Adam

logger = get_logger(__name__)


@dataclass
class TrainConfig:
    """Settings of one network fit."""

    lam: float = 0.0
    max_epochs: int = MAX_EPOCHS
    learning_rate: float = LEARNING_RATE
    seed: int = 0
    plateau_patience: int = PLATEAU_PATIENCE
    plateau_tolerance: float = PLATEAU_TOLERANCE

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ValidationError(f"lambda must be non-negative, got {self.lam}")
        if self.max_epochs < 1 or self.plateau_patience < 1:
            raise ValidationError("Epoch counts must be positive")
        if self.learning_rate <= 0:
            raise ValidationError("Learning rate must be positive")


@dataclass
class TrainingResult:
    """Outcome of train().

    Attributes:
        network: Trained copy of the input network
        validation_error: Normalized validation error v
        raw_validation_error: Plain sum of squared validation errors
        epochs: Epochs run
        first_loss: Training loss before the first update
        final_loss: Training loss of the returned weights
        seconds: Wall time
    """

    network: ErrorMapNetwork
    validation_error: float
    raw_validation_error: float
    epochs: int
    first_loss: float
    final_loss: float
    seconds: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def work(self) -> float:
        """Deterministic training work: epochs x samples x trainable parameters."""
        return float(self.metadata.get("work", 0.0))


def validation_error(net: ErrorMapNetwork, data: Batch) -> Tuple[float, float]:
    """Return (normalized v, raw sum of squares) over a validation batch."""
    out, _ = net.forward_batch(data.fields, data.zs)
    residual = out - data.targets.reshape(len(data), -1)
    per_sample = np.sum(residual * residual, axis=1)
    raw = float(np.sum(per_sample))
    normalized = float(np.mean(per_sample / residual.shape[1]))
    return normalized, raw


def train(
    net: ErrorMapNetwork,
    training: Batch,
    validation: Batch,
    cfg: TrainConfig,
    hyperparameters: Optional[Dict[str, Any]] = None,
) -> TrainingResult:
    """
    Train a copy of net on the training batch.

    Args:
        net: Network to start from; left untouched
        training: Training pairs T
        validation: Validation pairs V
        cfg: Optimizer and stopping settings
        hyperparameters: Attached to divergence errors for diagnosis

    Returns:
        TrainingResult with the trained copy and its validation error

    Raises:
        TrainingDivergenceError: If the loss becomes non-finite
    """
    started = time.perf_counter()
    model = net.copy()
    params = model.parameters(trainable_only=True)
    optimizer = Adam(cfg.learning_rate)
    best = np.inf
    best_history = []
    best_params: Dict[str, np.ndarray] = {}
    first_loss = None
    value = np.inf
    epoch = 0

    if not params:
        value, _ = loss_and_gradients(model, training, cfg.lam, need_gradients=False)
        first_loss = value

    for epoch in range(1, cfg.max_epochs + 1 if params else 1):
        value, grads = loss_and_gradients(model, training, cfg.lam)
        if not np.isfinite(value):
            logger.warning(f"Training diverged at epoch {epoch}")
            raise TrainingDivergenceError(
                "Loss became non-finite; the learning rate is probably too large",
                epoch,
                {
                    "learning_rate": cfg.learning_rate,
                    "hyperparameters": hyperparameters or {},
                },
            )
        if first_loss is None:
            first_loss = value
        if value < best:
            best = value
            best_params = {name: array.copy() for name, array in params.items()}
        best_history.append(best)
        if (
            len(best_history) > cfg.plateau_patience
            and best_history[-1 - cfg.plateau_patience] - best < cfg.plateau_tolerance
        ):
            logger.debug(f"Loss plateau at epoch {epoch} (loss {value:.3e})")
            break
        optimizer.step(params, grads.blocks)

    if best_params:
        for name, array in params.items():
            array[...] = best_params[name]
        value = best

    v, raw = validation_error(model, validation)
    seconds = time.perf_counter() - started
    work = float(epoch * len(training) * model.parameter_count(trainable_only=True))
    logger.debug(
        f"Trained {epoch} epochs: loss {first_loss:.3e} -> {value:.3e}, "
        f"v={v:.3e} (raw {raw:.3e})"
    )
    return TrainingResult(
        network=model,
        validation_error=v,
        raw_validation_error=raw,
        epochs=epoch,
        first_loss=float(first_loss),
        final_loss=float(value),
        seconds=seconds,
        metadata={"work": work, "seed": cfg.seed, "lambda": cfg.lam},
    )
