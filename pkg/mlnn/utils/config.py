"""
Configuration management for mlnn

This module handles loading and managing run configurations from:
- Configuration files (JSON, YAML)
- Environment variables
- Command line overrides
- Default values
"""

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Type, TypeVar, Union

import yaml

from .. import constants as C
from .exceptions import ConfigurationError, FileError

T = TypeVar("T")


@dataclass
class ProblemConfig:
    """Which PDE to solve, over which parameter box, on which coarse grid."""

    kind: str = C.PROBLEM_ADVECTION_DIFFUSION
    bounds: List[List[float]] = field(default_factory=lambda: [[1.0, 100.0]])
    n_coarse: int = 100
    newton_tol: float = C.NEWTON_TOL
    newton_max_iter: int = C.NEWTON_MAX_ITER
    synthetic_shape: List[int] = field(default_factory=lambda: [8, 8])


@dataclass
class TrainingConfig:
    """Optimizer and stopping settings for one network fit."""

    learning_rate: float = C.LEARNING_RATE
    max_epochs: int = C.MAX_EPOCHS
    plateau_patience: int = C.PLATEAU_PATIENCE
    plateau_tolerance: float = C.PLATEAU_TOLERANCE
    filters_first_layer: int = C.FILTERS_FIRST_LAYER
    transfer_learning: bool = True


@dataclass
class SearchConfig:
    """Hyperparameter grids; widths are multiples of the coarse interval count."""

    lambdas: List[float] = field(default_factory=lambda: list(C.LAMBDA_GRID))
    n_cnn: List[int] = field(default_factory=lambda: list(C.N_CNN_GRID))
    n_fc: List[int] = field(default_factory=lambda: list(C.N_FC_GRID))
    width_factors: List[float] = field(default_factory=lambda: list(C.WIDTH_FACTORS))
    transfer_lambdas: List[float] = field(default_factory=lambda: list(C.LAMBDA_GRID))
    transfer_width_factors: List[float] = field(
        default_factory=lambda: list(C.WIDTH_FACTORS)
    )


@dataclass
class MultilevelConfig:
    """Thresholds and caps of the level loop."""

    max_levels: int = C.MAX_LEVELS
    epsilon: float = C.EPSILON
    epsilon_acc: float = C.EPSILON_ACC
    max_rounds: int = C.MAX_ENRICHMENT_ROUNDS
    holdout_samples: int = C.HOLDOUT_SAMPLES


@dataclass
class MlscConfig:
    """Baseline settings; n_levels None means use multilevel.max_levels."""

    epsilon: float = C.MLSC_EPSILON
    max_cc_level: int = C.MAX_CC_LEVEL
    n_levels: Optional[int] = None


@dataclass
class LoggingConfig:
    """Logging configuration settings."""

    level: str = "INFO"
    log_file: Optional[str] = None


@dataclass
class RunConfig:
    """Main configuration class."""

    problem: ProblemConfig = field(default_factory=ProblemConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    multilevel: MultilevelConfig = field(default_factory=MultilevelConfig)
    mlsc: MlscConfig = field(default_factory=MlscConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    seed: int = 0
    jobs: int = 1

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """Create RunConfig from dictionary, rejecting unknown keys."""
        if not isinstance(data, dict):
            raise ConfigurationError("Run config must be a mapping")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(
                f"Unknown config sections: {', '.join(unknown)}", {"keys": unknown}
            )
        config = cls(
            problem=_section(ProblemConfig, data.get("problem", {}), "problem"),
            training=_section(TrainingConfig, data.get("training", {}), "training"),
            search=_section(SearchConfig, data.get("search", {}), "search"),
            multilevel=_section(
                MultilevelConfig, data.get("multilevel", {}), "multilevel"
            ),
            mlsc=_section(MlscConfig, data.get("mlsc", {}), "mlsc"),
            logging=_section(LoggingConfig, data.get("logging", {}), "logging"),
            seed=data.get("seed", 0),
            jobs=data.get("jobs", 1),
        )
        config.validate()
        return config

    def to_dict(self) -> Dict[str, Any]:
        """Convert RunConfig to dictionary."""
        return asdict(self)

    def content_hash(self) -> str:
        """Git-style blob SHA-1 of the canonical JSON form."""
        payload = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        header = f"blob {len(payload)}\0".encode()
        return hashlib.sha1(header + payload).hexdigest()

    def save(self, path: Union[str, Path]) -> None:
        """Save configuration to file."""
        path = Path(path)
        data = self.to_dict()

        if path.suffix.lower() == ".json":
            with open(path, "w") as f:
                json.dump(data, f, indent=2)
        elif path.suffix.lower() in [".yml", ".yaml"]:
            with open(path, "w") as f:
                yaml.dump(data, f, default_flow_style=False, indent=2)
        else:
            raise ConfigurationError(f"Unsupported config file format: {path.suffix}")

    def validate(self) -> None:
        """Check value ranges; raises ConfigurationError on the first problem."""
        p = self.problem
        if p.kind not in C.PROBLEM_KINDS:
            raise ConfigurationError(
                f"Unknown problem kind '{p.kind}'", {"allowed": list(C.PROBLEM_KINDS)}
            )
        if not p.bounds:
            raise ConfigurationError("problem.bounds must list at least one interval")
        for bound in p.bounds:
            if len(bound) != 2 or not float(bound[0]) < float(bound[1]):
                raise ConfigurationError(f"Invalid parameter interval {bound}")
        if p.n_coarse < 2:
            raise ConfigurationError("problem.n_coarse must be at least 2")
        if len(p.synthetic_shape) != 2 or not all(
            1 <= int(s) <= C.SYNTHETIC_MAX_EXTENT for s in p.synthetic_shape
        ):
            raise ConfigurationError(
                "problem.synthetic_shape must be two extents of at most "
                f"{C.SYNTHETIC_MAX_EXTENT}, got {p.synthetic_shape}"
            )
        t = self.training
        if t.learning_rate <= 0 or t.max_epochs < 1 or t.plateau_patience < 1:
            raise ConfigurationError("training settings must be positive")
        if t.filters_first_layer < 1:
            raise ConfigurationError("training.filters_first_layer must be positive")
        s = self.search
        for name in ("lambdas", "transfer_lambdas"):
            values = getattr(s, name)
            if not values or any(v < 0 for v in values):
                raise ConfigurationError(f"search.{name} must be non-negative values")
        for name in ("n_cnn", "n_fc"):
            values = getattr(s, name)
            if not values or any(v < 0 for v in values):
                raise ConfigurationError(f"search.{name} must be non-negative counts")
        for name in ("width_factors", "transfer_width_factors"):
            values = getattr(s, name)
            if not values or any(v <= 0 for v in values):
                raise ConfigurationError(f"search.{name} must be positive")
        m = self.multilevel
        if m.max_levels < 1:
            raise ConfigurationError("multilevel.max_levels must be at least 1")
        if m.epsilon <= 0 or m.epsilon_acc <= 0:
            raise ConfigurationError("multilevel thresholds must be positive")
        if m.max_rounds < 1:
            raise ConfigurationError("multilevel.max_rounds must be at least 1")
        if self.mlsc.epsilon <= 0 or self.mlsc.max_cc_level < 0:
            raise ConfigurationError("mlsc settings out of range")
        if self.jobs < 1:
            raise ConfigurationError("jobs must be at least 1")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigurationError(
                f"seed must be a non-negative integer, got {self.seed!r}", {"seed": self.seed}
            )


def _section(cls: Type[T], data: Dict[str, Any], name: str) -> T:
    if not isinstance(data, dict):
        raise ConfigurationError(f"Config section '{name}' must be a mapping")
    try:
        return cls(**data)
    except TypeError as e:
        raise ConfigurationError(f"Invalid keys in section '{name}': {e}") from e


class ConfigManager:
    """Configuration manager that loads a run config from file and environment."""

    def __init__(self, config_path: Optional[Union[str, Path]] = None):
        """
        Initialize configuration manager.

        Args:
            config_path: Optional path to a JSON or YAML run config
        """
        self.config_path = Path(config_path) if config_path else None
        self._config: Optional[RunConfig] = None

    def load_config(self) -> RunConfig:
        """
        Load configuration from available sources.

        Returns:
            Loaded configuration
        """
        if self._config is not None:
            return self._config

        config_data: Dict[str, Any] = {}
        if self.config_path is not None:
            config_data = self._load_config_file(self.config_path)

        env_config = self._load_from_env()
        config_data = self._merge_config(config_data, env_config)

        self._config = RunConfig.from_dict(config_data)
        return self._config

    def _load_config_file(self, path: Path) -> Dict[str, Any]:
        """Load configuration from file."""
        if not path.exists():
            raise FileError(f"Config file not found: {path}", str(path))
        text = path.read_text()
        suffix = path.suffix.lower()
        if suffix == ".json":
            try:
                data = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigurationError(
                    f"Malformed JSON in {path} at line {e.lineno}, column {e.colno}: {e.msg}",
                    {"line": e.lineno, "column": e.colno},
                ) from e
        elif suffix in [".yml", ".yaml"]:
            try:
                data = yaml.safe_load(text) or {}
            except yaml.YAMLError as e:
                mark = getattr(e, "problem_mark", None)
                line = mark.line + 1 if mark else None
                column = mark.column + 1 if mark else None
                raise ConfigurationError(
                    f"Malformed YAML in {path} at line {line}, column {column}",
                    {"line": line, "column": column},
                ) from e
        else:
            raise ConfigurationError(f"Unsupported config file format: {path.suffix}")
        if not isinstance(data, dict):
            raise ConfigurationError(f"Config file {path} must contain a mapping")
        return data

    def _load_from_env(self) -> Dict[str, Any]:
        """Load configuration from environment variables."""
        config: Dict[str, Any] = {}

        jobs = os.getenv(C.ENV_JOBS)
        if jobs:
            try:
                config["jobs"] = int(jobs)
            except ValueError as e:
                raise ConfigurationError(f"{C.ENV_JOBS} must be an integer") from e
        if os.getenv(C.ENV_LOG_LEVEL):
            config.setdefault("logging", {})["level"] = os.getenv(C.ENV_LOG_LEVEL)

        return config

    def _merge_config(
        self, base: Dict[str, Any], override: Dict[str, Any]
    ) -> Dict[str, Any]:
        """Merge two configuration dictionaries."""
        result = base.copy()

        for key, value in override.items():
            if (
                key in result
                and isinstance(result[key], dict)
                and isinstance(value, dict)
            ):
                result[key] = self._merge_config(result[key], value)
            else:
                result[key] = value

        return result

    def get_config(self) -> RunConfig:
        """Get the current configuration."""
        return self.load_config()

    def create_default_config(self, path: Union[str, Path]) -> Path:
        """
        Write a default configuration file.

        Args:
            path: Destination (.json, .yml or .yaml)

        Returns:
            Path to the created config file
        """
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        RunConfig().save(path)
        return path


def load_run_config(
    path: Optional[Union[str, Path]], seed: Optional[int] = None
) -> RunConfig:
    """Load a run config and apply a --seed override."""
    config = ConfigManager(path).load_config()
    if seed is not None:
        config.seed = seed
        config.validate()
    return config
