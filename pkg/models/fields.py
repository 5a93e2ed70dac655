"""Smooth 1-periodic coefficient fields stored as finite trigonometric polynomials."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from models.errors import ModelDimensionError


TWO_PI = 2.0 * np.pi

ArrayLike = Union[float, list, tuple, np.ndarray]


@dataclass(frozen=True)
class FourierTerm:
    k: tuple[int, ...]
    cos: float = 0.0
    sin: float = 0.0


@dataclass(frozen=True)
class FieldSpec:
    """constant + sum_j [cos_j cos(2 pi k_j.x) + sin_j sin(2 pi k_j.x)] on [0,1)^d."""

    constant: float = 0.0
    terms: tuple[FourierTerm, ...] = ()

    def __post_init__(self) -> None:
        dims = {len(term.k) for term in self.terms}
        if len(dims) > 1:
            raise ModelDimensionError(f"Field terms mix wavevector dimensions {sorted(dims)}.")

    @classmethod
    def constant_field(cls, value: float) -> "FieldSpec":
        return cls(constant=float(value))

    @property
    def dimension(self) -> Optional[int]:
        if not self.terms:
            return None
        return len(self.terms[0].k)

    @property
    def is_constant(self) -> bool:
        return all(not any(term.k) or (term.cos == 0.0 and term.sin == 0.0) for term in self.terms)

    def constant_value(self) -> float:
        # zero wavevectors contribute cos(0) = 1
        return self.constant + sum(term.cos for term in self.terms if not any(term.k))

    def wavevectors(self) -> np.ndarray:
        return np.array([term.k for term in self.terms], dtype=float).reshape(len(self.terms), -1)

    def coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        cos = np.array([term.cos for term in self.terms], dtype=float)
        sin = np.array([term.sin for term in self.terms], dtype=float)
        return cos, sin


def wrap(x: ArrayLike) -> np.ndarray:
    """Map coordinates onto [0,1) by removing integer parts."""

    x = np.asarray(x, dtype=float)
    wrapped = x - np.floor(x)
    # x slightly below an integer can round up to exactly 1.0
    return np.where(wrapped >= 1.0, 0.0, wrapped)


def _points(f: FieldSpec, x: ArrayLike, d: Optional[int] = None) -> tuple[np.ndarray, bool]:
    points = np.asarray(x, dtype=float)
    single = points.ndim <= 1
    if points.ndim < 2:
        points = points.reshape(1, -1)
    expected = f.dimension if f.dimension is not None else d
    if expected is not None and points.shape[1] != expected:
        raise ModelDimensionError(
            f"Point has {points.shape[1]} coordinate(s) but the field wavevectors have {expected}."
        )
    return wrap(points), single


def _phases(f: FieldSpec, points: np.ndarray) -> np.ndarray:
    return TWO_PI * points @ f.wavevectors().T


def eval_field(f: FieldSpec, x: ArrayLike, d: Optional[int] = None) -> Union[float, np.ndarray]:
    """Value of the field at one point (shape (d,)) or many points (shape (n, d))."""

    points, single = _points(f, x, d)
    if f.is_constant:
        values = np.full(points.shape[0], f.constant_value())
    else:
        phase = _phases(f, points)
        cos, sin = f.coefficients()
        values = f.constant + np.cos(phase) @ cos + np.sin(phase) @ sin
    return float(values[0]) if single else values


def eval_field_gradient(f: FieldSpec, x: ArrayLike, d: Optional[int] = None) -> np.ndarray:
    points, single = _points(f, x, d)
    if f.is_constant:
        gradient = np.zeros_like(points)
    else:
        phase = _phases(f, points)
        cos, sin = f.coefficients()
        weights = -np.sin(phase) * cos + np.cos(phase) * sin
        gradient = weights @ (TWO_PI * f.wavevectors())
    return gradient[0] if single else gradient


def eval_field_hessian(f: FieldSpec, x: ArrayLike, d: Optional[int] = None) -> np.ndarray:
    points, single = _points(f, x, d)
    dim = points.shape[1]
    if f.is_constant:
        hessian = np.zeros((points.shape[0], dim, dim))
    else:
        phase = _phases(f, points)
        cos, sin = f.coefficients()
        weights = np.cos(phase) * cos + np.sin(phase) * sin
        k = f.wavevectors()
        hessian = -(TWO_PI**2) * np.einsum("nt,tj,tl->njl", weights, k, k)
    return hessian[0] if single else hessian
