"""CSV / JSON / COO writers and readers for run artifacts.

Every file carries the config hash and seed: JSON files as top-level keys, CSV files as
a leading ``# config_hash=..., seed=...`` comment line.
"""

from __future__ import annotations

import json
from pathlib import Path
import re
from typing import Any, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from models.grid import GridFunction, TorusGrid


FLOAT_FORMAT = "%.17g"
_HEADER = re.compile(r"#\s*config_hash=(?P<hash>[0-9a-f]+),\s*seed=(?P<seed>\d+)")


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_json(path: Path, payload: dict, config_hash: str, seed: int) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"config_hash": config_hash, "seed": seed, **payload}
    path.write_text(json.dumps(document, indent=2, sort_keys=True, default=_to_builtin) + "\n", encoding="utf-8")
    return path


def read_json(path: Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_csv(path: Path, frame: pd.DataFrame, config_hash: str, seed: int) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"# config_hash={config_hash}, seed={seed}\n")
        frame.to_csv(fh, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def read_csv(path: Path) -> tuple[pd.DataFrame, Optional[str], Optional[int]]:
    """Frame plus the config hash and seed from the header comment (None when absent)."""

    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        first = fh.readline()
    match = _HEADER.match(first)
    frame = pd.read_csv(path, comment="#")
    if match is None:
        return frame, None, None
    return frame, match.group("hash"), int(match.group("seed"))


def grid_function_frame(grid: TorusGrid, functions: Union[GridFunction, Mapping[str, GridFunction]]) -> pd.DataFrame:
    """Columns node_index, x_1..x_d, mode (1-based) and one value column per function."""

    if isinstance(functions, GridFunction):
        functions = {"value": functions}
    m = next(iter(functions.values())).n_modes
    nodes = np.repeat(np.arange(grid.size), m)
    frame = pd.DataFrame({"node_index": nodes})
    coordinates = np.repeat(grid.coordinates, m, axis=0)
    for j in range(grid.d):
        frame[f"x_{j + 1}"] = coordinates[:, j]
    frame["mode"] = np.tile(np.arange(1, m + 1), grid.size)
    for name, function in functions.items():
        if function.values.size != grid.size * m:
            raise ValueError(f"Column {name!r} does not match the grid layout.")
        frame[name] = function.values
    return frame


def grid_function_from_frame(frame: pd.DataFrame, column: str = "value") -> GridFunction:
    ordered = frame.sort_values(["node_index", "mode"], kind="mergesort")
    n_modes = int(ordered["mode"].max())
    return GridFunction(ordered[column].to_numpy(dtype=float), n_modes)


def paths_frame(paths: Sequence) -> pd.DataFrame:
    """Columns path_id, t, X_1..X_d, I for a list of PathSamples."""

    frames = []
    for path in paths:
        frame = pd.DataFrame({"path_id": np.full(path.times.size, path.path_id), "t": path.times})
        for j in range(path.X.shape[1]):
            frame[f"X_{j + 1}"] = path.X[:, j]
        frame["I"] = path.modes
        frames.append(frame)
    if not frames:
        return pd.DataFrame(columns=["path_id", "t", "I"])
    return pd.concat(frames, ignore_index=True)


def write_operator_coo(path: Path, coo_frame: pd.DataFrame, config_hash: str, seed: int) -> Path:
    return write_csv(path, coo_frame, config_hash, seed)
