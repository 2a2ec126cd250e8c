"""
File I/O utilities for mlnn

JSON reports and checkpoints, CSV tables and JSON-lines sample archives.
JSON floats are written with Python's shortest round-trip repr; CSV floats
use 17 significant digits. Both reload bit-exactly.
"""

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

import numpy as np

from ..constants import FLOAT_FORMAT
from ..models import FieldSample
from .exceptions import ConfigurationError, FileError
from .logging import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps_json(data: Any) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2, default=_to_builtin) + "\n"


def write_json(path: PathLike, data: Any) -> Path:
    """Write data as canonical JSON, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(data))
    logger.debug(f"Wrote {path}")
    return path


def read_json(path: PathLike) -> Any:
    """
    Read a JSON document.

    Raises:
        FileError: If the file does not exist
        ConfigurationError: If the content is not valid JSON
    """
    path = Path(path)
    if not path.is_file():
        raise FileError(f"File not found: {path}", str(path))
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigurationError(
            f"Malformed JSON in {path} at line {e.lineno}, column {e.colno}: {e.msg}",
            {"line": e.lineno, "column": e.colno},
        ) from e


def format_cell(value: Any) -> str:
    """Render one CSV cell; floats with 17 significant digits."""
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT.format(float(value))
    if value is None:
        return ""
    return str(value)


def write_csv(
    path: PathLike, headers: Sequence[str], rows: Iterable[Sequence[Any]]
) -> Path:
    """Write a comma-separated table with a header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(headers)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    logger.debug(f"Wrote {path}")
    return path


def read_csv(path: PathLike) -> List[Dict[str, str]]:
    """Read a CSV written by write_csv into a list of row dictionaries."""
    path = Path(path)
    if not path.is_file():
        raise FileError(f"File not found: {path}", str(path))
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def parse_float(text: str) -> float:
    """Inverse of format_cell for numeric cells; empty means NaN."""
    return float(text) if text != "" else math.nan


def write_samples(path: PathLike, samples: Iterable[FieldSample]) -> Path:
    """Write a JSON-lines archive, one FieldSample per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for sample in samples:
            f.write(json.dumps(sample.to_dict(), sort_keys=True) + "\n")
    return path


def read_samples(path: PathLike) -> List[FieldSample]:
    """Read a JSON-lines archive written by write_samples."""
    path = Path(path)
    if not path.is_file():
        raise FileError(f"File not found: {path}", str(path))
    samples = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                samples.append(FieldSample.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as e:
                raise ConfigurationError(
                    f"Bad sample record in {path} at line {lineno}: {e}",
                    {"line": lineno},
                ) from e
    return samples


def write_profile(path: PathLike, x: np.ndarray, u: np.ndarray) -> Path:
    """Write an (x, u) profile for plotting."""
    return write_csv(path, ["x", "u"], zip(x.tolist(), u.tolist()))
