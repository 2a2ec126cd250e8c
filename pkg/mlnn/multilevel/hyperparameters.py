"""
Hyperparameter grids

Level 2 searches the tensor grid lambda x N_CNN x N_FC x n (3**4 = 81 cells
with the default lists). Transfer levels only choose lambda and the width n
of the appended layer (3**2 = 9 cells). Widths are factors of the coarse
interval count N1.
"""

import itertools
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Tuple

from ..utils.config import SearchConfig


@dataclass(frozen=True)
class Hyperparameters:
    """One grid cell.

    Attributes:
        lam: L2 coefficient
        n_cnn: Conv layers (level 2 only)
        n_fc: Hidden dense layers (level 2 only)
        width: Dense width; for transfer levels the appended layer's width
        transfer: Cell of a transfer-level grid
    """

    lam: float
    n_cnn: int = 0
    n_fc: int = 0
    width: int = 1
    transfer: bool = False

    def sort_key(self) -> Tuple[float, int, int, int]:
        return (self.lam, self.n_cnn, self.n_fc, self.width)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Hyperparameters":
        return cls(
            lam=float(data["lam"]),
            n_cnn=int(data.get("n_cnn", 0)),
            n_fc=int(data.get("n_fc", 0)),
            width=int(data.get("width", 1)),
            transfer=bool(data.get("transfer", False)),
        )

    def label(self) -> str:
        if self.transfer:
            return f"lam={self.lam:g} n={self.width}"
        return f"lam={self.lam:g} cnn={self.n_cnn} fc={self.n_fc} n={self.width}"


def widths(factors: List[float], n_coarse: int) -> List[int]:
    """floor(factor * N1), at least 1, duplicates removed in order."""
    seen: List[int] = []
    for factor in factors:
        width = max(1, math.floor(factor * n_coarse))
        if width not in seen:
            seen.append(width)
    return seen


def level2_grid(search: SearchConfig, n_coarse: int) -> List[Hyperparameters]:
    """Full tensor grid for the first error map."""
    return [
        Hyperparameters(lam, n_cnn, n_fc, width)
        for lam, n_cnn, n_fc, width in itertools.product(
            search.lambdas, search.n_cnn, search.n_fc, widths(search.width_factors, n_coarse)
        )
    ]


def transfer_grid(search: SearchConfig, n_coarse: int) -> List[Hyperparameters]:
    """lambda x n grid for the transfer levels."""
    return [
        Hyperparameters(lam, width=width, transfer=True)
        for lam, width in itertools.product(
            search.transfer_lambdas, widths(search.transfer_width_factors, n_coarse)
        )
    ]
