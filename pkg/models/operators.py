"""Sparse finite-difference generator of the switching diffusion on the torus."""

from __future__ import annotations

from dataclasses import dataclass, field
import logging

import numpy as np
import pandas as pd
from scipy import sparse

from models.errors import GridError, ModelDimensionError
from models.grid import GridFunction, TorusGrid
from models.switching import SwitchingModel


logger = logging.getLogger(__name__)

PECLET_LIMIT = 2.0


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Row (node, mode) of ``matrix`` holds the discrete generator at that node and mode."""

    matrix: sparse.csr_matrix
    grid: TorusGrid
    model: SwitchingModel
    stencil_order: int = 2
    warnings: list[str] = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_modes(self) -> int:
        return self.model.n_modes

    @property
    def norm_inf(self) -> float:
        return float(abs(self.matrix).sum(axis=1).max())

    def apply(self, f: GridFunction) -> GridFunction:
        _check_size(self, f)
        return GridFunction(self.matrix @ f.values, self.n_modes)

    def to_coo_frame(self) -> pd.DataFrame:
        coo = self.matrix.tocoo()
        return pd.DataFrame({"row": coo.row, "col": coo.col, "value": coo.data})


def _check_size(op: DiscreteOperator, f: GridFunction) -> None:
    if f.values.size != op.size or f.n_modes != op.n_modes:
        raise GridError(f"Grid function of size {f.values.size} does not match operator of size {op.size}.")


def _global(nodes: np.ndarray, m: int) -> np.ndarray:
    """Global indices (N, m) of every mode at the given nodes."""
    return nodes[:, None] * m + np.arange(m)[None, :]


def _stencil_warnings(grid: TorusGrid, drift: np.ndarray, diffusion: np.ndarray) -> list[str]:
    warnings: list[str] = []
    a_min = float(np.linalg.eigvalsh(diffusion)[..., 0].min())
    h = np.asarray(grid.h)
    b_h = float((np.abs(drift) * h).max())
    peclet = np.inf if a_min <= 0 else b_h / a_min
    if peclet > PECLET_LIMIT:
        warnings.append(
            f"Cell Peclet number {peclet:.3g} exceeds {PECLET_LIMIT:g}; centered drift differences may lose monotonicity."
        )
    for j in range(grid.d):
        for k in range(j + 1, grid.d):
            cross = np.abs(diffusion[..., j, k]) / (h[j] * h[k])
            axial = np.minimum(diffusion[..., j, j] / h[j] ** 2, diffusion[..., k, k] / h[k] ** 2)
            if np.any(cross > axial):
                warnings.append(
                    f"Cross-derivative stencil on axes ({j + 1}, {k + 1}) is not diagonally dominated; "
                    "discrete positivity is not guaranteed."
                )
    return warnings


def assemble_generator(model: SwitchingModel, grid: TorusGrid) -> DiscreteOperator:
    """Centered drift, second and cross differences per mode plus the jump block Q(x_i) per node."""

    if grid.d != model.d:
        raise ModelDimensionError(f"Grid dimension {grid.d} does not match model dimension {model.d}.")

    m = model.n_modes
    points = grid.coordinates
    drift = model.drift_at(points)  # (N, m, d)
    diffusion = model.diffusion_at(points)  # (N, m, d, d)
    rates = model.rates_at(points)  # (N, m, m)

    nodes = np.arange(grid.size)
    rows_nodal = _global(nodes, m)
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []

    def add(target_nodes: np.ndarray, coeff: np.ndarray) -> None:
        rows.append(rows_nodal.ravel())
        cols.append(_global(target_nodes, m).ravel())
        vals.append(np.ascontiguousarray(coeff).ravel())

    forward = [grid.neighbor_indices(j, 1) for j in range(grid.d)]
    backward = [grid.neighbor_indices(j, -1) for j in range(grid.d)]

    for j, h_j in enumerate(grid.h):
        b_j = drift[:, :, j] / (2.0 * h_j)
        half_a = 0.5 * diffusion[:, :, j, j] / h_j**2
        add(forward[j], b_j + half_a)
        add(backward[j], -b_j + half_a)
        add(nodes, -2.0 * half_a)

    for j in range(grid.d):
        for k in range(j + 1, grid.d):
            # (1/2)(a_jk + a_kj) D_jk with a symmetric
            c = diffusion[:, :, j, k] / (4.0 * grid.h[j] * grid.h[k])
            pp = forward[j][forward[k]]
            mm = backward[j][backward[k]]
            pm = forward[j][backward[k]]
            mp = backward[j][forward[k]]
            add(pp, c)
            add(mm, c)
            add(pm, -c)
            add(mp, -c)

    jump_rows = np.repeat(rows_nodal, m, axis=1).ravel()
    jump_cols = np.tile(rows_nodal, (1, m)).ravel()
    rows.append(jump_rows)
    cols.append(jump_cols)
    vals.append(rates.ravel())

    size = grid.size * m
    matrix = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    ).tocsr()
    matrix.sum_duplicates()
    matrix.eliminate_zeros()

    warnings = _stencil_warnings(grid, drift, diffusion)
    for message in warnings:
        logger.warning(message)
    logger.info("Assembled generator: %d unknowns, %d nonzeros, grid %s, %d mode(s)", size, matrix.nnz, grid.n, m)
    return DiscreteOperator(matrix=matrix, grid=grid, model=model, warnings=warnings)


def apply_adjoint(op: DiscreteOperator, v: GridFunction) -> GridFunction:
    _check_size(op, v)
    return GridFunction(op.matrix.T @ v.values, op.n_modes)


def _nodal_rates(model: SwitchingModel, grid: TorusGrid, *functions: GridFunction) -> np.ndarray:
    for f in functions:
        if f.n_nodes != grid.size or f.n_modes != model.n_modes:
            raise GridError(f"Grid function of size {f.values.size} does not match {grid.size} nodes x {model.n_modes} modes.")
    return model.rates_at(grid.coordinates)


def apply_jump(model: SwitchingModel, grid: TorusGrid, f: GridFunction) -> GridFunction:
    """(Qf)(i, alpha) = sum_beta q_ab(x_i) f(i, beta)."""

    rates = _nodal_rates(model, grid, f)
    return GridFunction.from_nodal(np.einsum("nab,nb->na", rates, f.by_mode()))


def carre_du_champ_values(rates: np.ndarray, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """sum_beta q_ab (f_b - f_a)(g_b - g_a) for nodal arrays f, g of shape (N, m)."""

    df = f[:, None, :] - f[:, :, None]
    dg = g[:, None, :] - g[:, :, None]
    return np.sum(rates * (df * dg), axis=2)


def carre_du_champ(model: SwitchingModel, grid: TorusGrid, f: GridFunction, g: GridFunction) -> GridFunction:
    rates = _nodal_rates(model, grid, f, g)
    return GridFunction.from_nodal(carre_du_champ_values(rates, f.by_mode(), g.by_mode()))
