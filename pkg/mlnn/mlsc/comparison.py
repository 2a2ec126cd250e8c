"""
MLNN versus MLSC cost comparison

Merges two run reports into one table with a row per level: held-out
accuracy and cumulative build cost of each method, plus both costs scaled by
the largest MLSC cost. Costs use the deterministic work basis (solver work
plus training work).
"""

import math
from pathlib import Path
from typing import Any, Dict, List, Union

from ..utils.exceptions import ConfigurationError
from ..utils.io import write_csv

COMPARISON_HEADERS = [
    "levels",
    "mlnn_accuracy",
    "mlsc_accuracy",
    "mlnn_solver_work",
    "mlsc_solver_work",
    "mlnn_training_work",
    "mlnn_cost",
    "mlsc_cost",
    "mlnn_cost_normalized",
    "mlsc_cost_normalized",
]


def _levels(report: Dict[str, Any], method: str) -> List[Dict[str, Any]]:
    if report.get("method") != method:
        raise ConfigurationError(
            f"Expected an {method.upper()} report, got method={report.get('method')!r}"
        )
    try:
        return sorted(report["levels"], key=lambda entry: entry["level"])
    except (KeyError, TypeError) as e:
        raise ConfigurationError(f"{method.upper()} report has no level table") from e


def compare_reports(
    mlnn_report: Dict[str, Any], mlsc_report: Dict[str, Any]
) -> List[Dict[str, float]]:
    """
    One row per level present in either report.

    Raises:
        ConfigurationError: If a report is not of the expected method
    """
    mlnn = {e["level"]: e for e in _levels(mlnn_report, "mlnn")}
    mlsc = {e["level"]: e for e in _levels(mlsc_report, "mlsc")}
    mlsc_costs = [float(e["cumulative_cost"]) for e in mlsc.values()]
    scale = max(mlsc_costs) if mlsc_costs and max(mlsc_costs) > 0 else math.nan

    def get(table: Dict[int, Dict[str, Any]], level: int, key: str) -> float:
        entry = table.get(level)
        return float(entry[key]) if entry is not None and key in entry else math.nan

    rows = []
    for level in sorted(set(mlnn) | set(mlsc)):
        mlnn_cost = get(mlnn, level, "cumulative_cost")
        mlsc_cost = get(mlsc, level, "cumulative_cost")
        rows.append(
            {
                "levels": level,
                "mlnn_accuracy": get(mlnn, level, "accuracy"),
                "mlsc_accuracy": get(mlsc, level, "accuracy"),
                "mlnn_solver_work": get(mlnn, level, "solver_work"),
                "mlsc_solver_work": get(mlsc, level, "solver_work"),
                "mlnn_training_work": get(mlnn, level, "training_work"),
                "mlnn_cost": mlnn_cost,
                "mlsc_cost": mlsc_cost,
                "mlnn_cost_normalized": mlnn_cost / scale,
                "mlsc_cost_normalized": mlsc_cost / scale,
            }
        )
    return rows


def write_comparison(path: Union[str, Path], rows: List[Dict[str, float]]) -> Path:
    """Write comparison rows as CSV."""
    return write_csv(
        path, COMPARISON_HEADERS, ([row[h] for h in COMPARISON_HEADERS] for row in rows)
    )
