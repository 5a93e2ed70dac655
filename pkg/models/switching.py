"""Periodic switching-diffusion models and vectorized coefficient tabulation."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from models.errors import ModelDimensionError
from models.fields import FieldSpec, eval_field, wrap


FieldLike = Union[float, int, FieldSpec]


def as_field(value: FieldLike) -> FieldSpec:
    if isinstance(value, FieldSpec):
        return value
    return FieldSpec.constant_field(float(value))


@dataclass(frozen=True)
class SwitchingModel:
    """Drift b(.,alpha), diffusion sigma(.,alpha) and intensities q_ab(.) on the torus.

    Modes are stored 0-based. Intensities hold off-diagonal pairs only; the diagonal
    q_aa = -sum_{b != a} q_ab is computed on demand so every row of Q(x) sums to zero.
    """

    d: int
    r: int
    n_modes: int
    drift: tuple[tuple[FieldSpec, ...], ...]
    sigma: tuple[tuple[tuple[FieldSpec, ...], ...], ...]
    intensities: Mapping[tuple[int, int], FieldSpec] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "intensities", MappingProxyType(dict(self.intensities)))
        if self.d < 1 or self.r < 1 or self.n_modes < 1:
            raise ModelDimensionError("d, r and the mode count must all be at least 1.")
        if len(self.drift) != self.n_modes or any(len(row) != self.d for row in self.drift):
            raise ModelDimensionError(f"drift must hold {self.n_modes} mode(s) of {self.d} field(s).")
        if len(self.sigma) != self.n_modes or any(
            len(rows) != self.d or any(len(row) != self.r for row in rows) for rows in self.sigma
        ):
            raise ModelDimensionError(f"sigma must hold {self.n_modes} mode(s) of {self.d}x{self.r} fields.")
        for alpha, beta in self.intensities:
            if alpha == beta:
                raise ModelDimensionError("Diagonal intensities are derived, not stored.")
            if not (0 <= alpha < self.n_modes and 0 <= beta < self.n_modes):
                raise ModelDimensionError(f"Intensity pair ({alpha + 1}, {beta + 1}) names an unknown mode.")
        for spec in self.fields():
            if spec.dimension is not None and spec.dimension != self.d:
                raise ModelDimensionError(
                    f"A coefficient field uses {spec.dimension}-dimensional wavevectors in a d={self.d} model."
                )

    def fields(self) -> list[FieldSpec]:
        specs = [spec for row in self.drift for spec in row]
        specs.extend(spec for rows in self.sigma for row in rows for spec in row)
        specs.extend(self.intensities.values())
        return specs

    def intensity(self, alpha: int, beta: int) -> FieldSpec:
        return self.intensities.get((alpha, beta), FieldSpec())

    @property
    def is_spatially_constant(self) -> bool:
        return all(spec.is_constant for spec in self.fields())

    def _values(self, spec: FieldSpec, points: np.ndarray) -> np.ndarray:
        if spec.is_constant:
            return np.full(points.shape[0], spec.constant_value())
        return eval_field(spec, points)

    def _points(self, x) -> np.ndarray:
        points = np.asarray(x, dtype=float).reshape(-1, self.d)
        return wrap(points)

    def drift_at(self, x) -> np.ndarray:
        """b(x, alpha) with shape (n, m, d)."""
        points = self._points(x)
        out = np.empty((points.shape[0], self.n_modes, self.d))
        for alpha, row in enumerate(self.drift):
            for j, spec in enumerate(row):
                out[:, alpha, j] = self._values(spec, points)
        return out

    def sigma_at(self, x) -> np.ndarray:
        """sigma(x, alpha) with shape (n, m, d, r)."""
        points = self._points(x)
        out = np.empty((points.shape[0], self.n_modes, self.d, self.r))
        for alpha, rows in enumerate(self.sigma):
            for i, row in enumerate(rows):
                for j, spec in enumerate(row):
                    out[:, alpha, i, j] = self._values(spec, points)
        return out

    def diffusion_at(self, x) -> np.ndarray:
        """a = sigma sigma^T with shape (n, m, d, d); symmetric by construction."""
        sigma = self.sigma_at(x)
        return np.einsum("nair,najr->naij", sigma, sigma)

    def rates_at(self, x) -> np.ndarray:
        """Q(x) with shape (n, m, m), diagonal computed from the off-diagonal rates."""
        points = self._points(x)
        rates = np.zeros((points.shape[0], self.n_modes, self.n_modes))
        for (alpha, beta), spec in self.intensities.items():
            rates[:, alpha, beta] = self._values(spec, points)
        idx = np.arange(self.n_modes)
        rates[:, idx, idx] = -rates.sum(axis=2)
        return rates


def make_model(
    drift: Sequence[Sequence[FieldLike]],
    sigma: Sequence[Sequence[Sequence[FieldLike]]],
    intensities: Optional[Mapping[tuple[int, int], FieldLike]] = None,
    name: str = "",
) -> SwitchingModel:
    """Build a model from per-mode nested lists; intensity keys are 1-based (alpha, beta)."""

    n_modes = len(drift)
    d = len(drift[0]) if n_modes else 0
    r = len(sigma[0][0]) if n_modes and sigma and sigma[0] else 0
    return SwitchingModel(
        d=d,
        r=r,
        n_modes=n_modes,
        drift=tuple(tuple(as_field(v) for v in row) for row in drift),
        sigma=tuple(tuple(tuple(as_field(v) for v in row) for row in rows) for rows in sigma),
        intensities={(alpha - 1, beta - 1): as_field(v) for (alpha, beta), v in (intensities or {}).items()},
        name=name,
    )
