"""
Synthetic two-channel 2-D data

Exercises the rank-2, multi-channel convolution path without a flow solver.
The field is a z-weighted sum of smooth sine modes with seeded amplitudes;
the target is a quarter of its 5-point Laplacian with zero padding, a purely
local stencil a conv layer can represent exactly.
"""

from typing import Sequence, Tuple

import numpy as np

from ..constants import SYNTHETIC_MAX_EXTENT
from ..utils.exceptions import ValidationError

CHANNELS = 2
MODES = 3


def laplacian_5pt(field: np.ndarray) -> np.ndarray:
    """Per-channel 5-point Laplacian of [C, H, W] with zeros outside."""
    padded = np.pad(field, ((0, 0), (1, 1), (1, 1)))
    return (
        padded[:, :-2, 1:-1]
        + padded[:, 2:, 1:-1]
        + padded[:, 1:-1, :-2]
        + padded[:, 1:-1, 2:]
        - 4.0 * field
    )


def synthetic_2d_sample(
    z: Sequence[float], shape: Tuple[int, int], seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Build a (field, target) pair of shape [2, H, W] each.

    Args:
        z: Parameter point; mode k, l of channel c is weighted by z[(c+k+l) % dim]
        shape: Spatial extent (H, W), each at most 32
        seed: Fixes the mode amplitudes

    Returns:
        (field, 0.25 * laplacian_5pt(field))
    """
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    height, width = (int(s) for s in shape)
    if not (1 <= height <= SYNTHETIC_MAX_EXTENT and 1 <= width <= SYNTHETIC_MAX_EXTENT):
        raise ValidationError(f"Synthetic shape must be within {SYNTHETIC_MAX_EXTENT}x{SYNTHETIC_MAX_EXTENT}, got {shape}")
    if z.size == 0:
        raise ValidationError("z must not be empty")
    rng = np.random.default_rng(seed)
    amplitudes = rng.normal(size=(CHANNELS, MODES, MODES))
    y = (np.arange(height) + 1.0) / (height + 1.0)
    x = (np.arange(width) + 1.0) / (width + 1.0)
    field = np.zeros((CHANNELS, height, width))
    for c in range(CHANNELS):
        for k in range(MODES):
            for m in range(MODES):
                weight = amplitudes[c, k, m] * z[(c + k + m) % z.size]
                field[c] += weight * np.outer(
                    np.sin((k + 1) * np.pi * y), np.sin((m + 1) * np.pi * x)
                )
    return field, 0.25 * laplacian_5pt(field)
