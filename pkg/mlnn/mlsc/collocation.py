"""
Clenshaw-Curtis collocation grids

Level m has 2**m + 1 cosine-spaced nodes per dimension (one midpoint node at
m = 0). Nodes are computed as mid + half * sin(pi * (2j - n) / (2n)), which
lists them in ascending order, hits the midpoint exactly and makes every
level's nodes bit-identical to the matching nodes of the next level.
Interpolation uses the barycentric Lagrange form with the closed-form
Chebyshev weights, tensorized across dimensions.
"""

from dataclasses import dataclass, field
from itertools import product
from typing import List, Sequence, Tuple

import numpy as np

from ..utils.exceptions import ShapeError, ValidationError
from ..utils.validation import validate_bounds


def cc_nodes(m: int, interval: Sequence[float]) -> np.ndarray:
    """Clenshaw-Curtis nodes of level m on [a, b], ascending."""
    if m < 0:
        raise ValidationError(f"Collocation level must be non-negative, got {m}")
    a, b = float(interval[0]), float(interval[1])
    mid, half = (a + b) / 2.0, (b - a) / 2.0
    if m == 0:
        return np.array([mid])
    n = 2**m
    j = np.arange(n + 1)
    return mid + half * np.sin(np.pi * ((2 * j - n) / (2 * n)))


def barycentric_weights(count: int) -> np.ndarray:
    """(-1)**j, halved at both ends; [1] for a single node."""
    if count == 1:
        return np.ones(1)
    weights = (-1.0) ** np.arange(count)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return weights


def _coefficients(nodes: np.ndarray, weights: np.ndarray, x: float) -> np.ndarray:
    """Lagrange basis values at x; exactly one-hot when x is a node."""
    diff = x - nodes
    hit = np.flatnonzero(diff == 0.0)
    if hit.size:
        coefficients = np.zeros(len(nodes))
        coefficients[hit[0]] = 1.0
        return coefficients
    terms = weights / diff
    return terms / terms.sum()


@dataclass
class CollocationGrid:
    """Tensor Clenshaw-Curtis grid over a parameter box.

    Attributes:
        cc_level: Level m
        bounds: [dim, 2] box
        nodes: Per-dimension node arrays
        weights: Per-dimension barycentric weights
    """

    cc_level: int
    bounds: np.ndarray
    nodes: List[np.ndarray] = field(default_factory=list)
    weights: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.bounds = validate_bounds(self.bounds)
        self.nodes = [cc_nodes(self.cc_level, row) for row in self.bounds]
        self.weights = [barycentric_weights(len(n)) for n in self.nodes]

    @property
    def dimension(self) -> int:
        return len(self.nodes)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(n) for n in self.nodes)

    def points(self) -> List[Tuple[float, ...]]:
        """All tensor nodes in C order of the node indices."""
        return [tuple(float(v) for v in p) for p in product(*self.nodes)]

    def interpolate(self, values: np.ndarray, z: np.ndarray) -> np.ndarray:
        """
        Evaluate the interpolant of nodal values at z.

        Args:
            values: [*shape, *field_shape] data at the tensor nodes
            z: Point of length dim

        Returns:
            Interpolated field, shape field_shape
        """
        values = np.asarray(values, dtype=np.float64)
        z = np.atleast_1d(np.asarray(z, dtype=np.float64))
        if values.shape[: self.dimension] != self.shape:
            raise ShapeError(
                f"Nodal values {values.shape} do not match grid shape {self.shape}"
            )
        if z.size != self.dimension:
            raise ShapeError(f"z has {z.size} entries, grid has {self.dimension}")
        result = values
        for nodes, weights, x in zip(self.nodes, self.weights, z):
            result = np.tensordot(_coefficients(nodes, weights, float(x)), result, axes=1)
        return result


def interpolate(grid: CollocationGrid, values: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Barycentric tensor interpolation of nodal values at z."""
    return grid.interpolate(values, z)
