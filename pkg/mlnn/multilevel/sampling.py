"""
Monte Carlo parameter sampling

Parameters are uniformly distributed over their box; every draw is fixed by
a seed so runs are reproducible.
"""

import numpy as np

from ..utils.exceptions import ValidationError
from ..utils.parallel import task_seed
from ..utils.validation import validate_bounds

HOLDOUT_STREAM = 7919


def sample_z(bounds, count: int, seed: int) -> np.ndarray:
    """
    Draw count i.i.d. uniform points from the box.

    Returns:
        Array of shape [count, dim]
    """
    if count < 1:
        raise ValidationError(f"Sample count must be at least 1, got {count}")
    box = validate_bounds(bounds)
    rng = np.random.default_rng(seed)
    return rng.uniform(box[:, 0], box[:, 1], size=(count, box.shape[0]))


def batch_size(level: int, dim: int) -> int:
    """Samples per enrichment round: 10**dim on level 2, 2**dim above."""
    return 10**dim if level == 2 else 2**dim


def holdout_z(bounds, count: int, seed: int) -> np.ndarray:
    """Held-out evaluation points, drawn from a stream no build step uses."""
    return sample_z(bounds, count, task_seed(seed, HOLDOUT_STREAM))
