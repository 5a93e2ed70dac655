"""Grid-node checks of ellipticity, intensity sign and per-point irreducibility."""

from __future__ import annotations

from dataclasses import dataclass, field
import logging

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from models.errors import ModelDimensionError
from models.grid import TorusGrid
from models.switching import SwitchingModel


logger = logging.getLogger(__name__)

IRREDUCIBILITY_TOL = 1e-12


@dataclass(frozen=True)
class Violation:
    node: int
    modes: tuple[int, ...]
    kind: str
    value: float = 0.0

    def as_dict(self) -> dict:
        return {"node": self.node, "modes": list(self.modes), "kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class ValidationReport:
    ellipticity_min: float
    intensity_min: float
    irreducible_everywhere: bool
    max_total_rate: float
    grid_n: tuple[int, ...]
    violations: list[Violation] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return self.ellipticity_min > 0 and self.intensity_min >= 0 and self.irreducible_everywhere

    def as_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "ellipticity_min": self.ellipticity_min,
            "intensity_min": self.intensity_min,
            "irreducible_everywhere": self.irreducible_everywhere,
            "max_total_rate": self.max_total_rate,
            "grid_n": list(self.grid_n),
            "violations": [v.as_dict() for v in self.violations],
        }


def _is_strongly_connected(adjacency: np.ndarray) -> bool:
    if adjacency.shape[0] == 1:
        return True
    n_components, _ = connected_components(csr_matrix(adjacency), directed=True, connection="strong")
    return n_components == 1


def validate_model(
    model: SwitchingModel,
    grid: TorusGrid,
    irreducibility_tol: float = IRREDUCIBILITY_TOL,
    max_violations: int = 100,
) -> ValidationReport:
    """Evaluate the standing assumptions at every node; failures are reported, never raised."""

    if grid.d != model.d:
        raise ModelDimensionError(f"Grid dimension {grid.d} does not match model dimension {model.d}.")

    points = grid.coordinates
    violations: list[Violation] = []

    eigen_min = np.linalg.eigvalsh(model.diffusion_at(points))[..., 0]  # (N, m)
    ellipticity_min = float(eigen_min.min())
    for node, alpha in zip(*np.nonzero(eigen_min <= 0)):
        violations.append(Violation(int(node), (int(alpha) + 1,), "ellipticity", float(eigen_min[node, alpha])))

    rates = model.rates_at(points)
    off_diagonal = ~np.eye(model.n_modes, dtype=bool)
    if model.n_modes > 1:
        off_values = rates[:, off_diagonal]
        intensity_min = float(off_values.min())
    else:
        intensity_min = 0.0
    for node, alpha, beta in zip(*np.nonzero((rates < 0) & off_diagonal)):
        violations.append(
            Violation(int(node), (int(alpha) + 1, int(beta) + 1), "negative_intensity", float(rates[node, alpha, beta]))
        )

    total_rate = np.where(off_diagonal, rates, 0.0).sum(axis=2)
    max_total_rate = float(total_rate.max()) if model.n_modes > 1 else 0.0

    irreducible_everywhere = True
    if model.n_modes > 1:
        adjacency = (rates > irreducibility_tol) & off_diagonal
        patterns, inverse = np.unique(adjacency.reshape(grid.size, -1), axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        for k, pattern in enumerate(patterns):
            if _is_strongly_connected(pattern.reshape(model.n_modes, model.n_modes).astype(float)):
                continue
            irreducible_everywhere = False
            for node in np.flatnonzero(inverse == k):
                violations.append(Violation(int(node), (), "reducible"))

    report = ValidationReport(
        ellipticity_min=ellipticity_min,
        intensity_min=intensity_min,
        irreducible_everywhere=irreducible_everywhere,
        max_total_rate=max_total_rate,
        grid_n=grid.n,
        violations=violations[:max_violations],
    )
    if not report.accepted:
        logger.warning(
            "Model %s rejected on grid %s: %d violation(s), first %s",
            model.name or "<unnamed>",
            grid.n,
            len(violations),
            violations[0].kind if violations else "none",
        )
    return report
