"""Euler-Maruyama paths of the switching diffusion with interval-sampled mode jumps.

Every path owns a Philox stream keyed by (seed, path_id) and draws its Gaussian and
uniform variates in fixed blocks of steps, so a path is bit-identical no matter how
paths are grouped into chunks or threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
import logging
import math
import os
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np

from models.errors import HorizonError, SimulationConfigError, SimulationError
from models.fields import wrap
from models.switching import SwitchingModel


logger = logging.getLogger(__name__)

SWITCH_FIDELITY = 0.1
STEP_BLOCK = 512
DEFAULT_CHUNK = 128


@dataclass(frozen=True)
class SimConfig:
    epsilon: float = 0.05
    horizon: float = 1.0
    h_micro: float = 0.01
    n_paths: int = 1000
    seed: int = 0
    x0: Optional[tuple[float, ...]] = None
    alpha0: int = 1
    record_stride: int = 1
    write_paths: bool = False
    chunk_size: int = DEFAULT_CHUNK

    @property
    def micro_horizon(self) -> float:
        return self.horizon / self.epsilon**2

    @property
    def n_steps(self) -> int:
        if self.horizon == 0:
            return 0
        return int(math.ceil(self.micro_horizon / self.h_micro - 1e-9))

    def initial_point(self, d: int) -> np.ndarray:
        if self.x0 is None:
            return np.zeros(d)
        return np.asarray(self.x0, dtype=float).reshape(d)

    def suggested_step(self, max_total_rate: float) -> Optional[float]:
        if max_total_rate <= 0:
            return None
        return SWITCH_FIDELITY / max_total_rate

    def validate(self, max_total_rate: float = 0.0, n_modes: Optional[int] = None) -> tuple[bool, Optional[str]]:
        if not 0 < self.epsilon <= 1:
            return False, "epsilon must lie in (0, 1]."
        if self.horizon < 0:
            return False, "horizon must be non-negative."
        if not self.h_micro > 0:
            return False, "h_micro must be positive."
        if self.n_paths < 1:
            return False, "n_paths must be at least 1."
        if self.record_stride < 1 or self.chunk_size < 1:
            return False, "record_stride and chunk_size must be at least 1."
        if not 0 <= self.seed < 2**64:
            return False, "seed must be an unsigned 64-bit integer."
        if n_modes is not None and not 1 <= self.alpha0 <= n_modes:
            return False, f"alpha0 must lie in 1..{n_modes}."
        if self.h_micro * max_total_rate > SWITCH_FIDELITY:
            return False, (
                f"h_micro * max_total_rate = {self.h_micro * max_total_rate:.3g} exceeds {SWITCH_FIDELITY:g}; "
                f"use h_micro <= {self.suggested_step(max_total_rate):.3g}."
            )
        return True, None

    def require_valid(self, max_total_rate: float = 0.0, n_modes: Optional[int] = None) -> None:
        ok, message = self.validate(max_total_rate, n_modes)
        if not ok:
            suggested = self.suggested_step(max_total_rate) if self.h_micro * max_total_rate > SWITCH_FIDELITY else None
            raise SimulationConfigError(message or "invalid simulation config", suggested_step=suggested)

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "horizon": self.horizon,
            "h_micro": self.h_micro,
            "n_paths": self.n_paths,
            "seed": self.seed,
            "x0": None if self.x0 is None else list(self.x0),
            "alpha0": self.alpha0,
            "record_stride": self.record_stride,
            "write_paths": self.write_paths,
            "chunk_size": self.chunk_size,
        }


@dataclass(frozen=True, eq=False)
class PathSample:
    """Recorded states of one path; modes are 1-based, X is carried unwrapped."""

    path_id: int
    seed: int
    times: np.ndarray
    X: np.ndarray
    modes: np.ndarray
    h_micro: float
    record_stride: int = 1
    scale: str = "micro"
    epsilon: float = 1.0

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def n_records(self) -> int:
        return self.times.size


def path_rng(seed: int, path_id: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(path_id,))))


def _switch_targets(rates: np.ndarray, current: np.ndarray, h: float, u: np.ndarray) -> np.ndarray:
    """Interval construction over beta != alpha in increasing order, vectorized over paths."""

    widths = rates * h
    widths[np.arange(current.size), current] = 0.0
    edges = np.cumsum(widths, axis=1)
    target = np.sum(edges <= u[:, None], axis=1)
    return np.where(target < rates.shape[1], target, current)


def sample_switch(model: SwitchingModel, x, alpha: int, h: float, u) -> Union[int, np.ndarray]:
    """Mode after one step of length h from 1-based mode alpha at micro position x.

    A scalar u gives an int; an array of uniforms gives one 1-based mode per draw.
    """

    draws = np.atleast_1d(np.asarray(u, dtype=float))
    rates = np.repeat(model.rates_at(x)[0, alpha - 1][None, :], draws.size, axis=0)
    target = _switch_targets(rates, np.full(draws.size, alpha - 1), h, draws) + 1
    return int(target[0]) if np.ndim(u) == 0 else target


class _Coefficients:
    """Per-path coefficient lookup; spatially constant models are tabulated once."""

    def __init__(self, model: SwitchingModel):
        self.model = model
        self.constant = model.is_spatially_constant
        if self.constant:
            origin = np.zeros((1, model.d))
            self.drift = model.drift_at(origin)[0]
            self.sigma = model.sigma_at(origin)[0]
            self.rates = model.rates_at(origin)[0]

    def at(self, x: np.ndarray, modes: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self.constant:
            return self.drift[modes], self.sigma[modes], self.rates[modes]
        points = wrap(x)
        rows = np.arange(modes.size)
        return (
            self.model.drift_at(points)[rows, modes],
            self.model.sigma_at(points)[rows, modes],
            self.model.rates_at(points)[rows, modes],
        )


def _record_steps(n_steps: int, stride: int) -> np.ndarray:
    return np.unique(np.append(np.arange(0, n_steps + 1, stride), n_steps))


def _simulate_chunk(model: SwitchingModel, config: SimConfig, path_ids: Sequence[int]) -> list[PathSample]:
    n_paths = len(path_ids)
    h = config.h_micro
    sqrt_h = math.sqrt(h)
    n_steps = config.n_steps
    coefficients = _Coefficients(model)
    generators = [path_rng(config.seed, path_id) for path_id in path_ids]

    X = np.tile(config.initial_point(model.d), (n_paths, 1))
    modes = np.full(n_paths, config.alpha0 - 1, dtype=np.int64)

    record_steps = _record_steps(n_steps, config.record_stride)
    recorded_X = np.empty((record_steps.size, n_paths, model.d))
    recorded_modes = np.empty((record_steps.size, n_paths), dtype=np.int64)
    recorded_X[0] = X
    recorded_modes[0] = modes
    slot = 1

    for block_start in range(0, n_steps, STEP_BLOCK):
        block = min(STEP_BLOCK, n_steps - block_start)
        normals = np.empty((block, n_paths, model.r))
        uniforms = np.empty((block, n_paths))
        for p, generator in enumerate(generators):
            normals[:, p, :] = generator.standard_normal((block, model.r))
            uniforms[:, p] = generator.random(block)

        for s in range(block):
            drift, sigma, rates = coefficients.at(X, modes)
            # intensities use the pre-step position
            X = X + drift * h + np.einsum("pir,pr->pi", sigma, normals[s]) * sqrt_h
            modes = _switch_targets(rates, modes, h, uniforms[s])
            step = block_start + s + 1
            if not np.all(np.isfinite(X)):
                raise SimulationError("Non-finite state in simulated path", step=step)
            if slot < record_steps.size and record_steps[slot] == step:
                recorded_X[slot] = X
                recorded_modes[slot] = modes
                slot += 1

    times = record_steps * h
    return [
        PathSample(
            path_id=int(path_id),
            seed=config.seed,
            times=times,
            X=recorded_X[:, p, :].copy(),
            modes=recorded_modes[:, p] + 1,
            h_micro=h,
            record_stride=config.record_stride,
        )
        for p, path_id in enumerate(path_ids)
    ]


def simulate_micro_path(model: SwitchingModel, config: SimConfig, path_id: int) -> PathSample:
    return _simulate_chunk(model, config, [path_id])[0]


def rescale_path(path: PathSample, epsilon: float, horizon: Optional[float] = None) -> PathSample:
    """(eps X_{t/eps^2}, I_{t/eps^2}) on macro time; modes are copied unscaled."""

    if path.scale != "micro":
        raise HorizonError("Only micro paths can be rescaled.")
    if horizon is not None and path.final_time < horizon / epsilon**2 * (1 - 1e-12):
        raise HorizonError(
            f"Micro path ends at s={path.final_time:.6g}, short of the required {horizon / epsilon**2:.6g}."
        )
    return replace(path, times=path.times * epsilon**2, X=path.X * epsilon, scale="macro", epsilon=epsilon)


def simulate_paths(
    model: SwitchingModel,
    config: SimConfig,
    per_path: Optional[Callable[[PathSample], Any]] = None,
    threads: Optional[int] = None,
    path_ids: Optional[Sequence[int]] = None,
) -> list[Any]:
    """Run paths in chunks across threads; results come back ordered by path_id."""

    ids = list(range(config.n_paths)) if path_ids is None else sorted(int(p) for p in path_ids)
    chunks = [ids[start : start + config.chunk_size] for start in range(0, len(ids), config.chunk_size)]
    workers = max(1, min(threads or os.cpu_count() or 1, len(chunks) or 1))
    reducer = per_path or (lambda path: path)

    def run(chunk: list[int]) -> list[Any]:
        return [reducer(path) for path in _simulate_chunk(model, config, chunk)]

    logger.info(
        "Simulating %d path(s) x %d step(s) in %d chunk(s) on %d thread(s)", len(ids), config.n_steps, len(chunks), workers
    )
    results: list[Any] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for chunk_result in pool.map(run, chunks):
            results.extend(chunk_result)
    return results
