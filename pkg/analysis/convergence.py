"""Grid-refinement study of the effective coefficients."""

from __future__ import annotations

import logging
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from models.grid import build_grid
from models.homogenize import SolverSettings, homogenize
from models.switching import SwitchingModel


logger = logging.getLogger(__name__)

Level = Union[int, Sequence[int]]


def _as_counts(level: Level, d: int) -> tuple[int, ...]:
    if isinstance(level, (int, np.integer)):
        return (int(level),) * d
    return tuple(int(n) for n in level)


def refinement_study(
    model: SwitchingModel,
    levels: Sequence[Level],
    settings: SolverSettings = SolverSettings(),
    reference_C: Optional[np.ndarray] = None,
) -> pd.DataFrame:
    """One row per grid: b_bar, C, the Frobenius error of C and the observed order between levels.

    Errors are measured against ``reference_C`` when given, otherwise against the finest level.
    """

    counts = sorted((_as_counts(level, model.d) for level in levels), key=lambda n: min(n))
    rows: list[dict] = []
    results = []
    for n in counts:
        grid = build_grid(model.d, n)
        result = homogenize(model, grid, settings)
        results.append((grid, result))

    reference = np.asarray(reference_C, dtype=float) if reference_C is not None else results[-1][1].coefficients.C
    previous: Optional[tuple[float, float]] = None
    for grid, result in results:
        C = result.coefficients.C
        error = float(np.linalg.norm(C - reference))
        h = max(grid.h)
        row: dict = {"n": "x".join(str(n_j) for n_j in grid.n), "h": h}
        for k, value in enumerate(result.b_bar, start=1):
            row[f"b_bar_{k}"] = float(value)
        for k in range(model.d):
            for l in range(model.d):
                row[f"C_{k + 1}{l + 1}"] = float(C[k, l])
        row["error"] = error
        if previous is not None and previous[1] > 0 and error > 0:
            row["observed_order"] = float(np.log(previous[1] / error) / np.log(previous[0] / h))
        else:
            row["observed_order"] = np.nan
        rows.append(row)
        previous = (h, error)
        logger.info("Refinement level %s: error %.3e", row["n"], error)

    return pd.DataFrame(rows)
