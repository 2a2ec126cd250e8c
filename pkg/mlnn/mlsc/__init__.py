"""
Multi-level stochastic collocation baseline
"""

from .build import MlscSurrogate, build_mlsc, mlsc_eval, run_mlsc
from .collocation import CollocationGrid, cc_nodes, interpolate
from .comparison import compare_reports, write_comparison

__all__ = [
    "CollocationGrid",
    "MlscSurrogate",
    "build_mlsc",
    "cc_nodes",
    "compare_reports",
    "interpolate",
    "mlsc_eval",
    "run_mlsc",
    "write_comparison",
]
