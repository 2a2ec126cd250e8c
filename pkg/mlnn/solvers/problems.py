"""
Parametric test problems

A SolverProblem binds a problem kind to its parameter box and exposes one
entry point, solve(z, n), used by the multi-level pipeline, the collocation
baseline and the CLI. For the 1-D problems z[0] is the Reynolds number and
the quantity of interest is the restricted field itself.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .. import constants as C
from ..utils.exceptions import SolverError, ValidationError
from ..utils.validation import validate_bounds
from .advection_diffusion import advection_diffusion_solution, exact_advection_diffusion
from .base import Solution
from .burgers import newton_burgers
from .diffusion import diffusion_solution
from .synthetic import synthetic_2d_sample


@dataclass
class SolverProblem:
    """A parametric PDE over a box of uncertain parameters.

    Attributes:
        kind: advection-diffusion, burgers, diffusion or synthetic-2d
        bounds: One [lower, upper] pair per parameter
        newton_tol: Burgers Newton tolerance
        newton_max_iter: Burgers Newton iteration cap
        synthetic_shape: (H, W) of synthetic-2d samples
    """

    kind: str
    bounds: np.ndarray
    newton_tol: float = C.NEWTON_TOL
    newton_max_iter: int = C.NEWTON_MAX_ITER
    synthetic_shape: Sequence[int] = field(default=(8, 8))

    def __post_init__(self) -> None:
        if self.kind not in C.PROBLEM_KINDS:
            raise ValidationError(f"Unknown problem kind '{self.kind}'")
        self.bounds = validate_bounds(self.bounds)
        if self.kind in (C.PROBLEM_ADVECTION_DIFFUSION, C.PROBLEM_BURGERS):
            if self.bounds[0, 0] <= 0:
                raise ValidationError("Reynolds numbers must be positive")

    @classmethod
    def from_config(cls, problem_config) -> "SolverProblem":
        """Build from a ProblemConfig."""
        return cls(
            kind=problem_config.kind,
            bounds=np.asarray(problem_config.bounds, dtype=np.float64),
            newton_tol=problem_config.newton_tol,
            newton_max_iter=problem_config.newton_max_iter,
            synthetic_shape=tuple(problem_config.synthetic_shape),
        )

    @property
    def dimension(self) -> int:
        return int(self.bounds.shape[0])

    def contains(self, z: np.ndarray) -> bool:
        z = np.atleast_1d(np.asarray(z, dtype=np.float64))
        return bool(
            np.all(z >= self.bounds[:, 0]) and np.all(z <= self.bounds[:, 1])
        )

    def solve(self, z: np.ndarray, n: int) -> Solution:
        """
        Solve at parameter point z on an n-interval grid.

        Raises:
            ValidationError: For a bad z or a grid too coarse for z
            SolverError: If the solve fails or the kind has no grid solver
        """
        z = np.atleast_1d(np.asarray(z, dtype=np.float64))
        if z.size != self.dimension:
            raise ValidationError(f"z has {z.size} entries, problem has {self.dimension}")
        if self.kind == C.PROBLEM_ADVECTION_DIFFUSION:
            return advection_diffusion_solution(float(z[0]), n)
        if self.kind == C.PROBLEM_BURGERS:
            return newton_burgers(float(z[0]), n, self.newton_tol, self.newton_max_iter)
        if self.kind == C.PROBLEM_DIFFUSION:
            return diffusion_solution(n)
        raise SolverError(
            "synthetic-2d has no grid solver; use synthetic_sample()", {"z": z.tolist()}
        )

    def exact(self, z: np.ndarray, x: np.ndarray) -> Optional[np.ndarray]:
        """Closed-form solution where one exists, else None."""
        z = np.atleast_1d(np.asarray(z, dtype=np.float64))
        if self.kind == C.PROBLEM_ADVECTION_DIFFUSION:
            return exact_advection_diffusion(x, float(z[0]))
        if self.kind == C.PROBLEM_DIFFUSION:
            return np.asarray(x, dtype=np.float64).copy()
        return None

    def synthetic_sample(self, z: np.ndarray, seed: int):
        """Field/target pair of the synthetic-2d kind."""
        if self.kind != C.PROBLEM_SYNTHETIC_2D:
            raise ValidationError(f"{self.kind} is not a synthetic problem")
        return synthetic_2d_sample(z, tuple(self.synthetic_shape), seed)
