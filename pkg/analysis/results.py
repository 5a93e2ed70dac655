"""Shared result containers for simulation and verification runs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class CriterionOutcome:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "threshold": self.threshold,
            "detail": self.detail,
        }


@dataclass
class EnsembleSummary:
    """Displacement statistics Y_p = X_T - b_bar T / eps over an ensemble of macro paths."""

    n_paths: int
    horizon: float
    mean: np.ndarray
    covariance: np.ndarray
    covariance_stderr: np.ndarray
    drift: Optional[np.ndarray] = None
    drift_stderr: Optional[np.ndarray] = None

    def as_dict(self) -> dict:
        return {
            "n_paths": self.n_paths,
            "horizon": self.horizon,
            "mean": self.mean.tolist(),
            "covariance": self.covariance.tolist(),
            "covariance_stderr": self.covariance_stderr.tolist(),
            "drift": None if self.drift is None else self.drift.tolist(),
            "drift_stderr": None if self.drift_stderr is None else self.drift_stderr.tolist(),
        }
