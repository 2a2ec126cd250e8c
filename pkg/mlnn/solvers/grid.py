"""
Nested grid hierarchy and restriction

Level i has N1 * 2**(i-1) intervals on [0, 1]. Coarse point j coincides with
point j * 2**(i-1) on level i, so restriction to the coarsest grid is plain
subsampling.
"""

from dataclasses import dataclass

import numpy as np

from ..constants import REFINEMENT_FACTOR
from ..models import FieldSample
from ..utils.exceptions import ShapeError, ValidationError


@dataclass(frozen=True)
class GridHierarchy:
    """Nested 1-D grids.

    Attributes:
        n_coarse: Interval count of level 1
        n_levels: Number of levels
    """

    n_coarse: int
    n_levels: int

    def __post_init__(self) -> None:
        if self.n_coarse < 1:
            raise ValidationError(f"n_coarse must be positive, got {self.n_coarse}")
        if self.n_levels < 1:
            raise ValidationError(f"n_levels must be positive, got {self.n_levels}")

    def _check_level(self, level: int) -> None:
        if not 1 <= level <= self.n_levels:
            raise ValidationError(f"Level {level} outside 1..{self.n_levels}")

    def stride(self, level: int) -> int:
        """Fine-grid index step between consecutive coarse points."""
        self._check_level(level)
        return REFINEMENT_FACTOR ** (level - 1)

    def intervals(self, level: int) -> int:
        return self.n_coarse * self.stride(level)

    def points(self, level: int) -> np.ndarray:
        n = self.intervals(level)
        return np.arange(n + 1) / n

    def with_levels(self, n_levels: int) -> "GridHierarchy":
        return GridHierarchy(self.n_coarse, n_levels)

    def restrict(self, values: np.ndarray, level: int) -> np.ndarray:
        """Subsample a level-`level` field onto the coarsest grid."""
        values = np.asarray(values, dtype=np.float64)
        expected = self.intervals(level) + 1
        if values.shape[-1] != expected:
            raise ShapeError(
                f"Level-{level} field must have {expected} points, got {values.shape[-1]}",
                {"level": level, "expected": expected, "actual": values.shape[-1]},
            )
        return values[..., :: self.stride(level)].copy()


def restrict(values: np.ndarray, hierarchy: GridHierarchy, level: int) -> np.ndarray:
    """Restrict a level-`level` field to X(1)."""
    return hierarchy.restrict(values, level)


def level_error(u_i: FieldSample, u_im1: FieldSample) -> np.ndarray:
    """
    Inter-level error e(i) = u(i)|X1 - u(i-1)|X1.

    Raises:
        ValidationError: If the samples belong to different z or the levels
            are not consecutive
        ShapeError: If the restricted fields differ in shape
    """
    if u_i.z.shape != u_im1.z.shape or not np.array_equal(u_i.z, u_im1.z):
        raise ValidationError(
            "Level error needs samples of the same parameter point",
            {"z_fine": u_i.z.tolist(), "z_coarse": u_im1.z.tolist()},
        )
    if u_i.level != u_im1.level + 1:
        raise ValidationError(
            f"Level error needs consecutive levels, got {u_i.level} and {u_im1.level}"
        )
    if u_i.values.shape != u_im1.values.shape:
        raise ShapeError(
            f"Restricted fields differ in shape: {u_i.values.shape} vs {u_im1.values.shape}"
        )
    return u_i.values - u_im1.values
