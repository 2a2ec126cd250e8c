"""
Data models for mlnn with full type annotations

This module contains the data models shared across the solvers, the
multi-level pipeline, the collocation baseline and the CLI: restricted field
samples, the cost ledger and the run manifest. All models include
serialization methods.
"""

import threading
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional

import numpy as np

from .utils.exceptions import ValidationError


@dataclass
class FieldSample:
    """A solution restricted to the coarsest grid.

    Attributes:
        z: Parameter point the solution was computed for
        level: Grid level the solution came from (1 is the coarsest)
        values: Field values on the coarse grid, shape [N1+1] or [C, ...]
        quantity_channels: Number of solution quantities (1 for scalar problems)
    """

    z: np.ndarray
    level: int
    values: np.ndarray
    quantity_channels: int = 1

    def __post_init__(self) -> None:
        self.z = np.atleast_1d(np.asarray(self.z, dtype=np.float64))
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.level < 1:
            raise ValidationError(f"Level must be at least 1, got {self.level}")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError(
                "Field sample contains non-finite values",
                {"z": self.z.tolist(), "level": self.level},
            )

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            "z": self.z.tolist(),
            "level": self.level,
            "values": self.values.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FieldSample":
        """Create from dictionary (for JSON deserialization)."""
        return cls(
            z=np.asarray(data["z"], dtype=np.float64),
            level=int(data["level"]),
            values=np.asarray(data["values"], dtype=np.float64),
        )


def _bump(table: Dict[int, float], level: int, amount: float) -> None:
    table[level] = table.get(level, 0) + amount


@dataclass
class CostLedger:
    """Running cost totals of a surrogate build.

    Solver work is counted as grid points times sweeps (1 for a direct
    solve, the Newton iteration count otherwise). Training work is counted as
    epochs times training samples times network parameters, which keeps cost
    tables reproducible; wall time is recorded alongside. Every counter only
    grows.
    """

    solver_work: Dict[int, float] = field(default_factory=dict)
    solve_counts: Dict[int, int] = field(default_factory=dict)
    sample_counts: Dict[int, int] = field(default_factory=dict)
    training_work: Dict[int, float] = field(default_factory=dict)
    training_seconds: Dict[int, float] = field(default_factory=dict)
    coarse_solves: int = 0
    network_evaluations: int = 0
    _lock: threading.Lock = field(
        default_factory=threading.Lock, repr=False, compare=False
    )

    def charge_solve(self, level: int, work: float) -> None:
        """Record one PDE solve on a grid level."""
        with self._lock:
            _bump(self.solver_work, level, float(work))
            _bump(self.solve_counts, level, 1)

    def charge_samples(self, level: int, count: int) -> None:
        """Record newly drawn parameter samples for a level."""
        with self._lock:
            _bump(self.sample_counts, level, count)

    def charge_training(self, level: int, work: float, seconds: float) -> None:
        """Record one network fit."""
        with self._lock:
            _bump(self.training_work, level, float(work))
            _bump(self.training_seconds, level, float(seconds))

    def charge_evaluation(self, network_forwards: int) -> None:
        """Record one surrogate evaluation."""
        with self._lock:
            self.coarse_solves += 1
            self.network_evaluations += network_forwards

    @property
    def total_solver_work(self) -> float:
        return float(sum(self.solver_work.values()))

    @property
    def total_training_work(self) -> float:
        return float(sum(self.training_work.values()))

    @property
    def total_training_seconds(self) -> float:
        return float(sum(self.training_seconds.values()))

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        """Convert to dictionary; wall times only when include_timing is set."""

        def keyed(table: Dict[int, Any]) -> Dict[str, Any]:
            return {str(k): table[k] for k in sorted(table)}

        data: Dict[str, Any] = {
            "solver_work": keyed(self.solver_work),
            "solve_counts": keyed(self.solve_counts),
            "sample_counts": keyed(self.sample_counts),
            "training_work": keyed(self.training_work),
            "coarse_solves": self.coarse_solves,
            "network_evaluations": self.network_evaluations,
            "total_solver_work": self.total_solver_work,
            "total_training_work": self.total_training_work,
        }
        if include_timing:
            data["training_seconds"] = keyed(self.training_seconds)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CostLedger":
        """Create from dictionary (for JSON deserialization)."""

        def unkeyed(name: str) -> Dict[int, Any]:
            return {int(k): v for k, v in data.get(name, {}).items()}

        return cls(
            solver_work=unkeyed("solver_work"),
            solve_counts=unkeyed("solve_counts"),
            sample_counts=unkeyed("sample_counts"),
            training_work=unkeyed("training_work"),
            training_seconds=unkeyed("training_seconds"),
            coarse_solves=int(data.get("coarse_solves", 0)),
            network_evaluations=int(data.get("network_evaluations", 0)),
        )


@dataclass
class RunManifest:
    """What produced an output directory.

    Attributes:
        command: CLI subcommand name
        config_path: Config file used, if any
        seed: Root seed of the run
        output_dir: Directory every output was written to
        config_hash: Git-style blob SHA-1 of the canonical config JSON
        arguments: Command-specific arguments (report paths, N lists, ...)
        created: Creation time, kept out of the numerical outputs
    """

    command: str
    config_path: Optional[str]
    seed: int
    output_dir: str
    config_hash: str
    arguments: Dict[str, Any] = field(default_factory=dict)
    files: List[str] = field(default_factory=list)
    created: datetime = field(default_factory=datetime.now)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            "command": self.command,
            "config_path": self.config_path,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "config_hash": self.config_hash,
            "arguments": self.arguments,
            "files": sorted(self.files),
            "created": self.created.isoformat(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        """Create from dictionary (for JSON deserialization)."""
        created = data.get("created")
        return cls(
            command=data["command"],
            config_path=data.get("config_path"),
            seed=int(data["seed"]),
            output_dir=data["output_dir"],
            config_hash=data["config_hash"],
            arguments=data.get("arguments", {}),
            files=list(data.get("files", [])),
            created=datetime.fromisoformat(created) if created else datetime.now(),
        )
