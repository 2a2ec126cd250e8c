"""Pytest configuration and shared fixtures for mlnn tests"""

import logging
import sys
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pytest

# Add the project root to the Python path
sys.path.insert(0, str(Path(__file__).parent.parent))

from mlnn.models import CostLedger  # noqa: E402
from mlnn.nn.network import Batch, build_network  # noqa: E402
from mlnn.solvers.grid import GridHierarchy  # noqa: E402
from mlnn.solvers.problems import SolverProblem  # noqa: E402
from mlnn.utils.config import RunConfig  # noqa: E402

ROOT = Path(__file__).parent.parent


@pytest.fixture(autouse=True)
def isolated_environment(monkeypatch):
    """Keep tests independent of the caller's MLNN_* variables and colors."""
    monkeypatch.delenv("MLNN_JOBS", raising=False)
    monkeypatch.delenv("MLNN_LOG_LEVEL", raising=False)
    monkeypatch.setenv("MLNN_NO_COLOR", "1")
    yield
    logger = logging.getLogger("mlnn")
    for handler in list(logger.handlers):
        handler.close()
    logger.handlers.clear()


@pytest.fixture
def quick_config_dict() -> Dict[str, Any]:
    """Tiny diffusion run: one-cell grid, three levels, loose thresholds."""
    return {
        "problem": {"kind": "diffusion", "bounds": [[0.0, 1.0]], "n_coarse": 8},
        "training": {"learning_rate": 0.01, "max_epochs": 400, "plateau_patience": 50},
        "search": {
            "lambdas": [0.0],
            "n_cnn": [1],
            "n_fc": [1],
            "width_factors": [1.0],
            "transfer_lambdas": [0.0],
            "transfer_width_factors": [1.0],
        },
        "multilevel": {
            "max_levels": 3,
            "epsilon": 1e-2,
            "epsilon_acc": 1e-2,
            "max_rounds": 3,
            "holdout_samples": 4,
        },
        "mlsc": {"epsilon": 1e-2, "max_cc_level": 2, "n_levels": 2},
        "seed": 7,
    }


@pytest.fixture
def quick_config(quick_config_dict) -> RunConfig:
    return RunConfig.from_dict(quick_config_dict)


@pytest.fixture
def ad_problem() -> SolverProblem:
    """Advection-diffusion over Re in [1, 100]."""
    return SolverProblem("advection-diffusion", np.array([[1.0, 100.0]]))


@pytest.fixture
def burgers_problem() -> SolverProblem:
    return SolverProblem("burgers", np.array([[1.0, 100.0]]))


@pytest.fixture
def hierarchy() -> GridHierarchy:
    return GridHierarchy(100, 3)


@pytest.fixture
def ledger() -> CostLedger:
    return CostLedger()


@pytest.fixture
def small_network():
    """1-D network over 9-point fields with one conv and one dense layer."""
    return build_network((1, 9), z_dim=1, n_cnn=1, n_fc=1, width=6, seed=3)


@pytest.fixture
def small_batch() -> Batch:
    rng = np.random.default_rng(11)
    fields = rng.normal(size=(5, 9))
    zs = rng.uniform(1.0, 2.0, size=(5, 1))
    targets = 0.1 * rng.normal(size=(5, 9))
    return Batch(fields, zs, targets)


def pytest_collection_modifyitems(config, items):
    for item in items:
        if "Unit" in Path(str(item.fspath)).parts:
            item.add_marker(pytest.mark.unit)
