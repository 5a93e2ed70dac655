import json

import numpy as np
import pandas as pd
import pytest

from analysis.simulate import PathSample
from data.export import (
    grid_function_frame,
    grid_function_from_frame,
    paths_frame,
    read_csv,
    read_json,
    write_csv,
    write_json,
)
from models.grid import GridFunction, build_grid


def test_json_carries_hash_and_seed(tmp_path):
    path = write_json(tmp_path / "out" / "effective.json", {"C": np.eye(2), "n": np.int64(3)}, "abc123", 9)

    payload = read_json(path)
    assert payload["config_hash"] == "abc123"
    assert payload["seed"] == 9
    assert payload["C"] == [[1.0, 0.0], [0.0, 1.0]]
    assert payload["n"] == 3
    assert list(json.loads(path.read_text())) == sorted(payload)


def test_csv_header_is_read_back(tmp_path):
    frame = pd.DataFrame({"h": [0.1, 1 / 3]})

    path = write_csv(tmp_path / "convergence.csv", frame, "deadbeef", 42)
    loaded, config_hash, seed = read_csv(path)

    assert path.read_text().startswith("# config_hash=deadbeef, seed=42\n")
    assert config_hash == "deadbeef"
    assert seed == 42
    assert loaded["h"].iloc[1] == 1 / 3


def test_csv_without_header(tmp_path):
    path = tmp_path / "plain.csv"
    pd.DataFrame({"x": [1]}).to_csv(path, index=False)

    _, config_hash, seed = read_csv(path)

    assert config_hash is None and seed is None


def test_grid_function_frame_layout_and_recovery():
    grid = build_grid(2, (4, 4))
    values = np.arange(grid.size * 2, dtype=float)
    frame = grid_function_frame(grid, {"density": GridFunction(values, 2)})

    assert list(frame.columns) == ["node_index", "x_1", "x_2", "mode", "density"]
    assert list(frame["mode"][:4]) == [1, 2, 1, 2]
    assert frame["x_2"].iloc[2] == pytest.approx(0.25)

    shuffled = frame.sample(frac=1.0, random_state=0)
    np.testing.assert_array_equal(grid_function_from_frame(shuffled, "density").values, values)


def test_grid_function_frame_rejects_wrong_sizes():
    grid = build_grid(1, (8,))

    with pytest.raises(ValueError):
        grid_function_frame(grid, {"phi_1": GridFunction(np.zeros(10), 2)})


def test_paths_frame_columns():
    path = PathSample(
        path_id=4,
        seed=0,
        times=np.array([0.0, 0.5]),
        X=np.array([[0.0, 1.0], [0.5, 1.5]]),
        modes=np.array([1, 2]),
        h_micro=0.5,
    )

    frame = paths_frame([path])

    assert list(frame.columns) == ["path_id", "t", "X_1", "X_2", "I"]
    assert list(frame["I"]) == [1, 2]
