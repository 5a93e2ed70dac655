"""Built-in benchmark configurations.

Each preset is a complete RunConfig document plus the closed-form values it is known
to reproduce, so acceptance runs and tests need no hand-written config files.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
import math
from typing import Dict, List

from scipy.special import i0


def _trig(constant: float = 0.0, *terms: tuple) -> dict:
    """Field document from (k, cos, sin) triples."""
    return {"constant": constant, "terms": [{"k": list(k), "cos": c, "sin": s} for k, c, s in terms]}


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    document: dict
    reference: Dict[str, object] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)


# sigma_1^2 + sigma_2^2 = 2 + sin(2 pi x) with sigma_1 = p + q sin, sigma_2 = q cos
_HM_P = (math.sqrt(3.0) + 1.0) / 2.0
_HM_Q = (math.sqrt(3.0) - 1.0) / 2.0

_TELEGRAPH_SIGMA = math.sqrt(0.1)


PRESETS: Dict[str, Preset] = {
    "constant": Preset(
        name="constant",
        description="Single mode with constant drift (2, -1) and constant sigma in d=2.",
        document={
            "model": {
                "d": 2,
                "r": 2,
                "modes": [{"drift": [2.0, -1.0], "sigma": [[1.0, 0.5], [0.0, 1.0]]}],
            },
            "grid": {"n": [16, 16]},
            "sim": {"epsilon": 0.1, "horizon": 1.0, "h_micro": 0.01, "n_paths": 2000, "seed": 7},
            "verify": {"tests": ["covariance", "drift"]},
            "convergence": {"levels": [8, 16, 32]},
        },
        reference={"b_bar": [2.0, -1.0], "C": [[1.25, 0.5], [0.5, 1.0]]},
    ),
    "brownian": Preset(
        name="brownian",
        description="Standard Brownian motion in d=1: the pure-diffusion control with C = 1.",
        document={
            "model": {"d": 1, "r": 1, "modes": [{"drift": [0.0], "sigma": [[1.0]]}]},
            "grid": {"n": [16]},
            "sim": {"epsilon": 0.1, "horizon": 1.0, "h_micro": 0.01, "n_paths": 4000, "seed": 11},
            "verify": {"tests": ["covariance", "drift", "crossvariation"], "crossvar_paths": 2000},
            "convergence": {"levels": [8, 16, 32]},
        },
        reference={"b_bar": [0.0], "C": [[1.0]]},
    ),
    "harmonic-mean": Preset(
        name="harmonic-mean",
        description="d=1, one mode, b=0, a(x) = 2 + sin(2 pi x): C is the harmonic mean sqrt(3).",
        document={
            "model": {
                "d": 1,
                "r": 2,
                "modes": [
                    {
                        "drift": [0.0],
                        "sigma": [[_trig(_HM_P, ((1,), 0.0, _HM_Q)), _trig(0.0, ((1,), _HM_Q, 0.0))]],
                    }
                ],
            },
            "grid": {"n": [256]},
            "sim": {"epsilon": 0.05, "horizon": 1.0, "h_micro": 0.01, "n_paths": 500, "seed": 3},
            "verify": {
                "tests": ["ergodic"],
                "ergodic_observable": "a",
                "ergodic_epsilons": [0.2, 0.1, 0.05],
                "ergodic_paths": 500,
                "ergodic_step_exponent": 1.0,
            },
            "convergence": {"levels": [64, 128, 256]},
        },
        reference={"b_bar": [0.0], "C": [[math.sqrt(3.0)]], "g_bar": math.sqrt(3.0)},
        notes=[
            "The transpose scheme reproduces m = c / a node-wise, so the error is spectrally small.",
            "Ergodic runs halve h_micro with eps, starting from 0.01 at eps = 0.2.",
        ],
    ),
    "gradient-drift": Preset(
        name="gradient-drift",
        description="d=1, one mode, a=1, b(x) = sin(2 pi x): C = 1 / I0(1/pi)^2 with second-order grid error.",
        document={
            "model": {"d": 1, "r": 1, "modes": [{"drift": [_trig(0.0, ((1,), 0.0, 1.0))], "sigma": [[1.0]]}]},
            "grid": {"n": [128]},
            "sim": {"epsilon": 0.05, "horizon": 1.0, "h_micro": 0.01, "n_paths": 2000, "seed": 5},
            "verify": {"tests": ["covariance", "drift"]},
            "convergence": {"levels": [64, 128, 256]},
        },
        reference={"b_bar": [0.0], "C": [[1.0 / float(i0(1.0 / math.pi)) ** 2]]},
    ),
    "telegraph": Preset(
        name="telegraph",
        description="d=1, two modes with drift +1 / -1, q12 = q21 = 1, a = 0.1: C = 0.1 + 1.0.",
        document={
            "model": {
                "d": 1,
                "r": 1,
                "modes": [
                    {"drift": [1.0], "sigma": [[_TELEGRAPH_SIGMA]]},
                    {"drift": [-1.0], "sigma": [[_TELEGRAPH_SIGMA]]},
                ],
                "intensities": [{"from": 1, "to": 2, "field": 1.0}, {"from": 2, "to": 1, "field": 1.0}],
            },
            "grid": {"n": [16]},
            "sim": {"epsilon": 0.05, "horizon": 1.0, "h_micro": 0.01, "n_paths": 4000, "seed": 2024},
            "verify": {
                "tests": ["covariance", "drift", "crossvariation", "ergodic"],
                "crossvar_paths": 2000,
                "ergodic_observable": "mode:1",
                "ergodic_paths": 500,
            },
            "convergence": {"levels": [8, 16, 32]},
        },
        reference={
            "b_bar": [0.0],
            "C": [[1.1]],
            "diffusive_part": [[0.1]],
            "switching_part": [[1.0]],
            "phi": [-0.5, 0.5],
            "g_bar": 0.5,
        },
    ),
    "two-mode-periodic": Preset(
        name="two-mode-periodic",
        description="d=1, two modes with x-dependent drift, diffusion and intensities; no closed form.",
        document={
            "model": {
                "d": 1,
                "r": 1,
                "modes": [
                    {"drift": [_trig(0.5, ((1,), 0.0, 0.3))], "sigma": [[_trig(1.0, ((1,), 0.2, 0.0))]]},
                    {"drift": [_trig(-0.2, ((1,), 0.4, 0.0))], "sigma": [[0.7]]},
                ],
                "intensities": [
                    {"from": 1, "to": 2, "field": _trig(1.0, ((1,), 0.5, 0.0))},
                    {"from": 2, "to": 1, "field": _trig(0.8, ((1,), 0.0, 0.3))},
                ],
            },
            "grid": {"n": [256]},
            "sim": {"epsilon": 0.05, "horizon": 1.0, "h_micro": 0.01, "n_paths": 2000, "seed": 17},
            "verify": {"tests": ["covariance", "drift"]},
            "convergence": {"levels": [64, 128, 256]},
        },
        notes=["Self-consistency: n=128 and n=256 agree on C within 1e-3."],
    ),
    "two-mode-periodic-2d": Preset(
        name="two-mode-periodic-2d",
        description="d=2, two modes, anisotropic x-dependent diffusion exercising the cross stencil.",
        document={
            "model": {
                "d": 2,
                "r": 2,
                "modes": [
                    {
                        "drift": [_trig(0.0, ((1, 0), 0.0, 0.3)), _trig(0.0, ((0, 1), 0.2, 0.0))],
                        "sigma": [
                            [1.0, _trig(0.0, ((0, 1), 0.0, 0.3))],
                            [0.2, _trig(0.8, ((1, 0), 0.1, 0.0))],
                        ],
                    },
                    {
                        "drift": [-0.1, _trig(0.0, ((1, 1), 0.0, 0.25))],
                        "sigma": [[0.9, 0.0], [0.4, 0.7]],
                    },
                ],
                "intensities": [
                    {"from": 1, "to": 2, "field": _trig(1.0, ((1, 0), 0.4, 0.0))},
                    {"from": 2, "to": 1, "field": _trig(0.6, ((0, 1), 0.0, 0.2))},
                ],
            },
            "grid": {"n": [32, 32]},
            "sim": {"epsilon": 0.1, "horizon": 1.0, "h_micro": 0.01, "n_paths": 1000, "seed": 29},
            "verify": {"tests": ["covariance", "drift"]},
            "convergence": {"levels": [16, 32, 64]},
        },
    ),
}


def get_preset_options() -> List[str]:
    return list(PRESETS.keys())


def get_preset(name: str) -> Preset:
    """Strict lookup; unknown names raise KeyError listing the options."""

    if name not in PRESETS:
        raise KeyError(f"Unknown preset {name!r}; choose one of {', '.join(PRESETS)}.")
    return PRESETS[name]


def preset_document(name: str) -> dict:
    """Independent copy of a preset's RunConfig document with its name recorded."""

    document = copy.deepcopy(get_preset(name).document)
    document["preset"] = name
    return document
