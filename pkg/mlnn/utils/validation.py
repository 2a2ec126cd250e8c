"""
Input validation utilities for mlnn

This module provides the argument checks shared by the solvers, the pipeline
and the CLI: parameter boxes, positive counts, input files and output-path
containment.
"""

from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np

from .exceptions import FileError, ValidationError


def validate_bounds(bounds: Sequence[Sequence[float]]) -> np.ndarray:
    """
    Validate a parameter box.

    Args:
        bounds: One [lower, upper] pair per parameter dimension

    Returns:
        Array of shape [dim, 2]

    Raises:
        ValidationError: If a bound is non-finite or lower >= upper
    """
    box = np.asarray(bounds, dtype=np.float64)
    if box.ndim != 2 or box.shape[1] != 2 or box.shape[0] < 1:
        raise ValidationError(f"Bounds must be a list of [lower, upper] pairs: {bounds}")
    if not np.all(np.isfinite(box)):
        raise ValidationError(f"Bounds must be finite: {bounds}")
    if np.any(box[:, 0] >= box[:, 1]):
        raise ValidationError(f"Lower bound must be below upper bound: {bounds}")
    return box


def validate_positive(value: float, name: str) -> float:
    """Raise ValidationError unless value > 0."""
    if not value > 0:
        raise ValidationError(f"{name} must be positive, got {value}")
    return value


def validate_counts(values: Iterable[int], name: str, minimum: int = 1) -> List[int]:
    """Validate a non-empty list of integer counts."""
    counts = [int(v) for v in values]
    if not counts:
        raise ValidationError(f"{name} must not be empty")
    if any(c < minimum for c in counts):
        raise ValidationError(f"{name} entries must be at least {minimum}: {counts}")
    return counts


def validate_file_path(file_path: Union[str, Path]) -> Path:
    """
    Validate that an input file exists.

    Args:
        file_path: Path to validate

    Returns:
        Validated Path object

    Raises:
        FileError: If the file is missing or not a regular file
    """
    path = Path(file_path).resolve()

    if not path.exists():
        raise FileError(f"File not found: {file_path}", str(path))

    if not path.is_file():
        raise FileError(f"Path is not a file: {file_path}", str(path))

    return path


def ensure_within(out_dir: Path, target: Union[str, Path]) -> Path:
    """
    Resolve target below out_dir.

    Raises:
        FileError: If target would land outside out_dir
    """
    root = Path(out_dir).resolve()
    path = (root / target).resolve()
    try:
        path.relative_to(root)
    except ValueError as e:
        raise FileError(f"Refusing to write outside {root}: {target}", str(path)) from e
    return path
