"""Uniform periodic tensor grids on the torus and functions sampled on them."""

from __future__ import annotations

from dataclasses import dataclass
import math
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from models.errors import GridError, ModelDimensionError
from models.switching import SwitchingModel


MIN_NODES_PER_AXIS = 4


@dataclass(frozen=True)
class TorusGrid:
    """Nodes (i_1 h_1, ..., i_d h_d) numbered row-major over the axes."""

    n: tuple[int, ...]

    @property
    def d(self) -> int:
        return len(self.n)

    @property
    def h(self) -> tuple[float, ...]:
        return tuple(1.0 / n_j for n_j in self.n)

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def weight(self) -> float:
        return float(np.prod(self.h))

    @cached_property
    def multi_index(self) -> np.ndarray:
        return np.indices(self.n).reshape(self.d, -1).T

    @cached_property
    def coordinates(self) -> np.ndarray:
        return self.multi_index * np.asarray(self.h)

    def neighbor_indices(self, axis: int, step: int) -> np.ndarray:
        """Index of node + step*e_axis for every node, wrapped periodically."""
        shifted = self.multi_index.copy()
        shifted[:, axis] = (shifted[:, axis] + step) % self.n[axis]
        return np.ravel_multi_index(tuple(shifted.T), self.n)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values f(node, mode) stored at global index node * n_modes + mode (0-based mode)."""

    values: np.ndarray
    n_modes: int = 1

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.n_modes < 1 or values.size % self.n_modes:
            raise GridError(f"{values.size} values cannot be split over {self.n_modes} mode(s).")
        object.__setattr__(self, "values", values)

    @property
    def n_nodes(self) -> int:
        return self.values.size // self.n_modes

    def by_mode(self) -> np.ndarray:
        """(N, m) view of the values."""
        return self.values.reshape(self.n_nodes, self.n_modes)

    @classmethod
    def from_nodal(cls, matrix: np.ndarray) -> "GridFunction":
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim == 1:
            matrix = matrix[:, None]
        return cls(matrix.reshape(-1), n_modes=matrix.shape[1])


@dataclass(frozen=True)
class CoefficientSelector:
    """Names one coefficient; indices and modes are 1-based, mode=None tabulates every mode."""

    kind: str
    indices: tuple[int, ...]
    mode: Optional[int] = None

    @classmethod
    def drift(cls, k: int, mode: Optional[int] = None) -> "CoefficientSelector":
        return cls("drift", (k,), mode)

    @classmethod
    def diffusion(cls, j: int, k: int, mode: Optional[int] = None) -> "CoefficientSelector":
        return cls("diffusion", (j, k), mode)

    @classmethod
    def intensity(cls, alpha: int, beta: int) -> "CoefficientSelector":
        return cls("intensity", (alpha, beta))


def build_grid(d: int, n: Sequence[int]) -> TorusGrid:
    n = tuple(int(n_j) for n_j in n)
    if d < 1:
        raise GridError("Grid dimension must be at least 1.")
    if len(n) != d:
        raise GridError(f"Expected {d} per-axis node count(s), got {len(n)}.")
    if any(n_j < MIN_NODES_PER_AXIS for n_j in n):
        raise GridError(f"Every axis needs at least {MIN_NODES_PER_AXIS} nodes so stencil neighbors are distinct; got {n}.")
    return TorusGrid(n)


def neighbor(grid: TorusGrid, node: int, axis: int, step: int) -> int:
    index = list(np.unravel_index(node, grid.n))
    index[axis] = (index[axis] + step) % grid.n[axis]
    return int(np.ravel_multi_index(tuple(index), grid.n))


def _check_matches(grid: TorusGrid, f: GridFunction) -> None:
    if f.n_nodes * f.n_modes != f.values.size or f.n_nodes != grid.size:
        raise GridError(f"Grid function has {f.values.size} values; grid needs {grid.size} x {f.n_modes}.")


def quadrature(grid: TorusGrid, f: GridFunction) -> float:
    """w * sum over nodes and modes (periodic trapezoidal rule, compensated summation)."""

    _check_matches(grid, f)
    return grid.weight * math.fsum(f.values)


def sample_field(grid: TorusGrid, model: SwitchingModel, selector: CoefficientSelector) -> GridFunction:
    if grid.d != model.d:
        raise ModelDimensionError(f"Grid dimension {grid.d} does not match model dimension {model.d}.")
    points = grid.coordinates
    modes = range(model.n_modes) if selector.mode is None else [selector.mode - 1]
    if selector.mode is not None and not 1 <= selector.mode <= model.n_modes:
        raise ModelDimensionError(f"Mode {selector.mode} is outside 1..{model.n_modes}.")

    if selector.kind == "drift":
        (k,) = selector.indices
        if not 1 <= k <= model.d:
            raise ModelDimensionError(f"Drift component {k} is outside 1..{model.d}.")
        table = model.drift_at(points)[:, :, k - 1]
    elif selector.kind == "diffusion":
        j, k = selector.indices
        if not (1 <= j <= model.d and 1 <= k <= model.d):
            raise ModelDimensionError(f"Diffusion entry a_{j}{k} is outside the {model.d}x{model.d} matrix.")
        table = model.diffusion_at(points)[:, :, j - 1, k - 1]
    elif selector.kind == "intensity":
        alpha, beta = selector.indices
        if alpha == beta or not (1 <= alpha <= model.n_modes and 1 <= beta <= model.n_modes):
            raise ModelDimensionError(f"Intensity q_{alpha}{beta} is not an off-diagonal pair of {model.n_modes} modes.")
        return GridFunction(model.rates_at(points)[:, alpha - 1, beta - 1])
    else:
        raise ModelDimensionError(f"Unknown coefficient kind {selector.kind!r}.")

    return GridFunction.from_nodal(table[:, list(modes)])


def gradient(grid: TorusGrid, f: GridFunction) -> np.ndarray:
    """Centered-difference nodal gradient, shape (d, N * m)."""

    _check_matches(grid, f)
    shaped = f.values.reshape(*grid.n, f.n_modes)
    out = np.empty((grid.d, f.values.size))
    for axis, h in enumerate(grid.h):
        forward = np.roll(shaped, -1, axis=axis)
        backward = np.roll(shaped, 1, axis=axis)
        out[axis] = ((forward - backward) / (2.0 * h)).reshape(-1)
    return out


class PeriodicInterpolator:
    """Multilinear interpolation of a grid function at arbitrary points of R^d."""

    def __init__(self, grid: TorusGrid, f: GridFunction):
        _check_matches(grid, f)
        shaped = f.values.reshape(*grid.n, f.n_modes)
        padded = np.pad(shaped, [(0, 1)] * grid.d + [(0, 0)], mode="wrap")
        axes = tuple(np.arange(n_j + 1) * h for n_j, h in zip(grid.n, grid.h))
        self.d = grid.d
        self._interp = RegularGridInterpolator(axes, padded, method="linear", bounds_error=False, fill_value=None)

    def __call__(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, self.d)
        wrapped = points - np.floor(points)
        return self._interp(wrapped)


def interpolate(grid: TorusGrid, f: GridFunction, points) -> np.ndarray:
    """Values at the given points, shape (n_points, m)."""
    return PeriodicInterpolator(grid, f)(points)
