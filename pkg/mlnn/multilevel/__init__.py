"""
Multi-level surrogate construction
"""

from .dataset import LevelDataset, build_level_dataset
from .hyperparameters import Hyperparameters, level2_grid, transfer_grid
from .levels import LevelContext, enrich_until_valid, grid_search, train_level
from .pipeline import MlnnRun, run_mlnn, transfer_study
from .sampling import sample_z
from .surrogate import Surrogate, should_add_level, surrogate_eval

__all__ = [
    "Hyperparameters",
    "LevelContext",
    "LevelDataset",
    "MlnnRun",
    "Surrogate",
    "build_level_dataset",
    "enrich_until_valid",
    "grid_search",
    "level2_grid",
    "run_mlnn",
    "sample_z",
    "should_add_level",
    "surrogate_eval",
    "train_level",
    "transfer_grid",
    "transfer_study",
]
