"""Monte Carlo checks of the homogenization limit.

Covers the covariance of the rescaled displacement, the law of large numbers for the
drift, the cross-variation of the corrector martingale and the O(eps) decay of
ergodic time averages.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import logging
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from analysis.results import CriterionOutcome, EnsembleSummary
from analysis.simulate import PathSample, SimConfig, rescale_path, simulate_paths
from models.errors import HorizonError, ModelDimensionError, SimulationConfigError
from models.fields import wrap
from models.grid import GridFunction, PeriodicInterpolator, TorusGrid
from models.homogenize import (
    Corrector,
    HomogenizationResult,
    covariance_integrands,
    observable_mean,
    observable_variance,
)
from models.switching import SwitchingModel
from models.validation import validate_model


logger = logging.getLogger(__name__)

Observable = Callable[[np.ndarray, np.ndarray], np.ndarray]
VERIFY_TESTS = ("covariance", "drift", "crossvariation", "ergodic")


# Observables take wrapped points (n, d) and 1-based modes (n,).


def constant_observable(value: float) -> Observable:
    return lambda points, modes: np.full(np.shape(modes)[0], float(value))


def mode_indicator(mode: int) -> Observable:
    return lambda points, modes: (np.asarray(modes) == mode).astype(float)


def diffusion_observable(model: SwitchingModel, j: int = 1, k: int = 1) -> Observable:
    def g(points: np.ndarray, modes: np.ndarray) -> np.ndarray:
        table = model.diffusion_at(points)
        return table[np.arange(table.shape[0]), np.asarray(modes) - 1, j - 1, k - 1]

    return g


def drift_observable(model: SwitchingModel, k: int = 1) -> Observable:
    def g(points: np.ndarray, modes: np.ndarray) -> np.ndarray:
        table = model.drift_at(points)
        return table[np.arange(table.shape[0]), np.asarray(modes) - 1, k - 1]

    return g


def parse_observable(name: str, model: SwitchingModel) -> Observable:
    """'a' or 'a_jk', 'b_k', 'mode:k' or 'constant:c'."""

    key = name.strip()
    if key == "a":
        return diffusion_observable(model)
    if key.startswith("a_") and len(key) == 4 and key[2:].isdigit():
        j, k = int(key[2]), int(key[3])
        if not (1 <= j <= model.d and 1 <= k <= model.d):
            raise ModelDimensionError(f"Observable {name!r} names an entry outside the {model.d}x{model.d} matrix.")
        return diffusion_observable(model, j, k)
    if key.startswith("b_") and key[2:].isdigit():
        k = int(key[2:])
        if not 1 <= k <= model.d:
            raise ModelDimensionError(f"Observable {name!r} names a drift component outside 1..{model.d}.")
        return drift_observable(model, k)
    if key.startswith("mode:"):
        return mode_indicator(int(key.split(":", 1)[1]))
    if key.startswith("constant:"):
        return constant_observable(float(key.split(":", 1)[1]))
    raise ValueError(f"Unknown observable {name!r}.")


def tabulate_observable(grid: TorusGrid, g: Observable, n_modes: int) -> GridFunction:
    points = np.repeat(grid.coordinates, n_modes, axis=0)
    modes = np.tile(np.arange(1, n_modes + 1), grid.size)
    return GridFunction(g(points, modes), n_modes)


def final_state(path: PathSample) -> PathSample:
    """Keep only the first and last records of a path."""
    keep = [0, -1]
    return replace(path, times=path.times[keep], X=path.X[keep], modes=path.modes[keep])


def _require_macro(paths: Sequence[PathSample], horizon: float) -> None:
    if len(paths) < 2:
        raise ValueError("At least 2 paths are needed for ensemble statistics.")
    for path in paths:
        if path.scale != "macro":
            raise HorizonError(f"Path {path.path_id} is on the micro scale; rescale it first.")
        if path.final_time < horizon * (1 - 1e-12):
            raise HorizonError(f"Path {path.path_id} ends at t={path.final_time:.6g} < horizon {horizon:.6g}.")


def estimate_covariance(
    paths: Sequence[PathSample], b_bar: np.ndarray, epsilon: float, horizon: float
) -> tuple[np.ndarray, np.ndarray]:
    """Sample covariance of X_T - X_0 - b_bar T / eps divided by T, with its Gaussian standard error."""

    _require_macro(paths, horizon)
    b_bar = np.asarray(b_bar, dtype=float)
    final_times = np.array([path.final_time for path in paths])
    Y = np.array([path.X[-1] - path.X[0] for path in paths]) - np.outer(final_times, b_bar) / epsilon
    covariance = np.atleast_2d(np.cov(Y, rowvar=False)) / float(final_times.mean())
    covariance = 0.5 * (covariance + covariance.T)
    diagonal = np.diag(covariance)
    stderr = np.sqrt((np.outer(diagonal, diagonal) + covariance**2) / len(paths))
    return covariance, stderr


def estimate_drift(paths: Sequence[PathSample], epsilon: float, horizon: float) -> tuple[np.ndarray, np.ndarray]:
    """eps (X_T - X_0) / T estimates b_bar; returns (mean, standard error)."""

    _require_macro(paths, horizon)
    values = np.array([epsilon * (path.X[-1] - path.X[0]) / path.final_time for path in paths])
    return values.mean(axis=0), values.std(axis=0, ddof=1) / np.sqrt(len(paths))


def summarize_ensemble(paths: Sequence[PathSample], b_bar: np.ndarray, epsilon: float, horizon: float) -> EnsembleSummary:
    b_bar = np.asarray(b_bar, dtype=float)
    covariance, stderr = estimate_covariance(paths, b_bar, epsilon, horizon)
    drift, drift_stderr = estimate_drift(paths, epsilon, horizon)
    Y = np.array([path.X[-1] - path.X[0] - b_bar * path.final_time / epsilon for path in paths])
    return EnsembleSummary(
        n_paths=len(paths),
        horizon=horizon,
        mean=Y.mean(axis=0),
        covariance=covariance,
        covariance_stderr=stderr,
        drift=drift,
        drift_stderr=drift_stderr,
    )


def ergodic_average(path: PathSample, g: Observable, t_micro: float) -> float:
    """(1/t) sum of g(wrap(X_s), I_s) over recorded steps, left-endpoint rule."""

    if path.scale != "micro":
        raise HorizonError("Ergodic averages are taken along micro paths.")
    if t_micro <= 0:
        raise HorizonError("The averaging horizon must be positive.")
    if path.final_time < t_micro * (1 - 1e-12):
        raise HorizonError(f"Path {path.path_id} ends at s={path.final_time:.6g}, short of {t_micro:.6g}.")

    starts = path.times[:-1]
    active = starts < t_micro
    widths = (np.minimum(path.times[1:], t_micro) - starts)[active]
    values = g(wrap(path.X[:-1][active]), path.modes[:-1][active])
    return float(np.dot(values, widths) / t_micro)


@dataclass(frozen=True, eq=False)
class PathCrossVariation:
    path_id: int
    realized_diffusive: np.ndarray
    realized_switching: np.ndarray
    predicted_diffusive: np.ndarray
    predicted_switching: np.ndarray
    terminal: np.ndarray
    bound_excess: float

    @property
    def realized(self) -> np.ndarray:
        return self.realized_diffusive + self.realized_switching

    @property
    def predicted(self) -> np.ndarray:
        return self.predicted_diffusive + self.predicted_switching


class CrossVariationProbe:
    """Per-path realized and predicted cross-variation of the corrector martingale.

    M_t = eps [(X_s - X_0 - b_bar s) - (Phi(X_s, I_s) - Phi(X_0, I_0))] with s = t / eps^2.
    The predicted bracket integrates (I - D Phi) a (I - D Phi)^T + Q(Phi_k, Phi_l) along the
    path; both integrands and Phi are evaluated by multilinear interpolation of nodal tables.
    """

    def __init__(self, model: SwitchingModel, grid: TorusGrid, corrector: Corrector, b_bar: np.ndarray, epsilon: float):
        self.d = model.d
        self.n_modes = model.n_modes
        self.b_bar = np.asarray(b_bar, dtype=float)
        self.epsilon = epsilon
        diffusive, switching = covariance_integrands(model, grid, corrector)
        phi = corrector.nodal()
        # largest Euclidean length of Phi over nodes and modes; interpolants stay inside it
        self.phi_max = float(np.linalg.norm(phi, axis=-1).max())
        self._phi = PeriodicInterpolator(grid, GridFunction.from_nodal(phi.reshape(grid.size, -1)))
        self._diffusive = PeriodicInterpolator(grid, GridFunction.from_nodal(diffusive.reshape(grid.size, -1)))
        self._switching = PeriodicInterpolator(grid, GridFunction.from_nodal(switching.reshape(grid.size, -1)))

    def _select(self, interpolator: PeriodicInterpolator, points: np.ndarray, modes: np.ndarray, shape: tuple) -> np.ndarray:
        values = interpolator(points).reshape(points.shape[0], self.n_modes, *shape)
        return values[np.arange(points.shape[0]), modes - 1]

    def __call__(self, path: PathSample) -> PathCrossVariation:
        if path.scale != "micro" or path.record_stride != 1:
            raise SimulationConfigError("Cross-variation needs micro paths recorded at every step (record_stride = 1).")

        eps = self.epsilon
        X, modes, s = path.X, path.modes, path.times
        phi = self._select(self._phi, X, modes, (self.d,))
        drift_free = X - X[0] - np.outer(s, self.b_bar)
        M = eps * (drift_free - (phi - phi[0]))

        increments = np.diff(M, axis=0)
        products = increments[:, :, None] * increments[:, None, :]
        switched = modes[1:] != modes[:-1]

        dt = eps**2 * np.diff(s)
        diffusive = self._select(self._diffusive, X[:-1], modes[:-1], (self.d, self.d))
        switching = self._select(self._switching, X[:-1], modes[:-1], (self.d, self.d))

        remainder = eps * X[0] + eps * (phi - phi[0])
        bound = 2.0 * eps * self.phi_max + float(np.linalg.norm(eps * X[0]))
        excess = float(np.linalg.norm(remainder, axis=1).max()) - bound

        return PathCrossVariation(
            path_id=path.path_id,
            realized_diffusive=products[~switched].sum(axis=0),
            realized_switching=products[switched].sum(axis=0),
            predicted_diffusive=np.einsum("k,kij->ij", dt, diffusive),
            predicted_switching=np.einsum("k,kij->ij", dt, switching),
            terminal=M[-1],
            bound_excess=max(excess, 0.0),
        )


@dataclass
class CrossVariationResult:
    n_paths: int
    realized: np.ndarray
    predicted: np.ndarray
    rel_error: float
    diffusive_rel_error: float
    switching_rel_error: float
    martingale_mean: np.ndarray
    martingale_stderr: np.ndarray
    martingale_z: np.ndarray
    bound_excess: float

    def as_dict(self) -> dict:
        return {
            "n_paths": self.n_paths,
            "realized": self.realized.tolist(),
            "predicted": self.predicted.tolist(),
            "rel_error": self.rel_error,
            "diffusive_rel_error": self.diffusive_rel_error,
            "switching_rel_error": self.switching_rel_error,
            "martingale_mean": self.martingale_mean.tolist(),
            "martingale_stderr": self.martingale_stderr.tolist(),
            "martingale_z": self.martingale_z.tolist(),
            "bound_excess": self.bound_excess,
        }


def _relative_gap(a: np.ndarray, b: np.ndarray) -> float:
    scale = float(np.linalg.norm(b))
    gap = float(np.linalg.norm(a - b))
    if scale == 0.0:
        return 0.0 if gap == 0.0 else float("inf")
    return gap / scale


def summarize_crossvariation(stats: Sequence[PathCrossVariation]) -> CrossVariationResult:
    stats = sorted(stats, key=lambda item: item.path_id)
    n = len(stats)
    if n < 2:
        raise ValueError("At least 2 paths are needed for cross-variation statistics.")
    def mean(attr: str) -> np.ndarray:
        return np.mean([getattr(item, attr) for item in stats], axis=0)

    realized_diffusive, realized_switching = mean("realized_diffusive"), mean("realized_switching")
    predicted_diffusive, predicted_switching = mean("predicted_diffusive"), mean("predicted_switching")
    realized = realized_diffusive + realized_switching
    predicted = predicted_diffusive + predicted_switching

    terminal = np.array([item.terminal for item in stats])
    stderr = terminal.std(axis=0, ddof=1) / np.sqrt(n)
    martingale_mean = terminal.mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(stderr > 0, np.abs(martingale_mean) / stderr, 0.0)

    return CrossVariationResult(
        n_paths=n,
        realized=realized,
        predicted=predicted,
        rel_error=_relative_gap(realized, predicted),
        diffusive_rel_error=_relative_gap(realized_diffusive, predicted_diffusive),
        switching_rel_error=_relative_gap(realized_switching, predicted_switching),
        martingale_mean=martingale_mean,
        martingale_stderr=stderr,
        martingale_z=z,
        bound_excess=max(item.bound_excess for item in stats),
    )


def crossvariation_check(
    paths: Iterable[PathSample],
    model: SwitchingModel,
    grid: TorusGrid,
    corrector: Corrector,
    b_bar: np.ndarray,
    epsilon: float,
) -> CrossVariationResult:
    probe = CrossVariationProbe(model, grid, corrector, b_bar, epsilon)
    return summarize_crossvariation([probe(path) for path in paths])


@dataclass
class ErgodicScaling:
    epsilons: list[float]
    rms: list[float]
    ratios: list[float]
    means: list[float]
    g_bar: float
    predicted_rms: Optional[list[float]] = None
    h_micro: Optional[list[float]] = None

    def as_dict(self) -> dict:
        return {
            "epsilons": self.epsilons,
            "rms": self.rms,
            "ratios": self.ratios,
            "means": self.means,
            "g_bar": self.g_bar,
            "predicted_rms": self.predicted_rms,
            "h_micro": self.h_micro,
        }


def ergodic_scaling_test(
    model: SwitchingModel,
    g: Observable,
    epsilons: Sequence[float],
    horizon: float,
    n_paths: int,
    g_bar: float,
    base_config: SimConfig = SimConfig(),
    variance_rate: Optional[float] = None,
    threads: Optional[int] = None,
    step_exponent: float = 0.0,
) -> ErgodicScaling:
    """RMS over paths of the macro time average of g minus g_bar, for each halving eps.

    The micro step is base_config.h_micro at the first (largest) eps and shrinks as
    (eps / eps_0) ** step_exponent below it. With step_exponent = 1 the O(h) bias of the
    Euler chain's invariant law decays at the same rate as the statistical error.
    """

    epsilons = [float(eps) for eps in epsilons]
    if len(epsilons) < 2:
        raise SimulationConfigError("The ergodic scaling test needs at least two values of epsilon.")
    for coarse, fine in zip(epsilons, epsilons[1:]):
        if abs(coarse / fine - 2.0) > 1e-9:
            raise SimulationConfigError(f"Epsilon values must halve successively; got {coarse} then {fine}.")

    rms: list[float] = []
    means: list[float] = []
    steps: list[float] = []
    for eps in epsilons:
        h_micro = base_config.h_micro * (eps / epsilons[0]) ** step_exponent
        config = replace(base_config, epsilon=eps, horizon=horizon, n_paths=n_paths, record_stride=1, h_micro=h_micro)
        steps.append(h_micro)
        t_micro = config.micro_horizon
        averages = np.array(simulate_paths(model, config, per_path=lambda path: ergodic_average(path, g, t_micro), threads=threads))
        rms.append(float(np.sqrt(np.mean((averages - g_bar) ** 2))))
        means.append(float(averages.mean()))
        logger.info("Ergodic average at eps=%g, h=%g: mean %.6g, RMS error %.4g", eps, h_micro, means[-1], rms[-1])

    ratios = [coarse / fine if fine > 0 else float("nan") for coarse, fine in zip(rms, rms[1:])]
    predicted = None
    if variance_rate is not None:
        predicted = [eps * float(np.sqrt(max(variance_rate, 0.0) / horizon)) for eps in epsilons]
    return ErgodicScaling(epsilons, rms, ratios, means, g_bar, predicted, steps)


@dataclass(frozen=True)
class VerifyConfig:
    tests: tuple[str, ...] = VERIFY_TESTS
    covariance_tol: float = 0.10
    drift_slack: float = 0.02
    crossvar_tol: float = 0.05
    crossvar_paths: int = 2000
    z_limit: float = 4.0
    ergodic_observable: str = "a"
    ergodic_epsilons: tuple[float, ...] = (0.2, 0.1, 0.05)
    ergodic_horizon: float = 1.0
    ergodic_paths: int = 500
    ergodic_ratio_min: float = 1.4
    ergodic_ratio_max: float = 2.9
    ergodic_mean_tol: float = 0.02
    ergodic_step_exponent: float = 0.0

    def validate(self) -> tuple[bool, Optional[str]]:
        unknown = [name for name in self.tests if name not in VERIFY_TESTS]
        if unknown:
            return False, f"unknown test(s) {unknown}; expected a subset of {list(VERIFY_TESTS)}."
        if not self.tests:
            return False, "at least one test must be selected."
        for name in ("covariance_tol", "drift_slack", "crossvar_tol", "z_limit", "ergodic_horizon", "ergodic_mean_tol"):
            if not getattr(self, name) > 0:
                return False, f"{name} must be positive."
        if self.crossvar_paths < 2 or self.ergodic_paths < 2:
            return False, "path counts must be at least 2."
        if not 0 < self.ergodic_ratio_min <= self.ergodic_ratio_max:
            return False, "ergodic ratio bounds must satisfy 0 < min <= max."
        if self.ergodic_step_exponent < 0:
            return False, "ergodic_step_exponent must be non-negative."
        return True, None

    def as_dict(self) -> dict:
        return {
            "tests": list(self.tests),
            "covariance_tol": self.covariance_tol,
            "drift_slack": self.drift_slack,
            "crossvar_tol": self.crossvar_tol,
            "crossvar_paths": self.crossvar_paths,
            "z_limit": self.z_limit,
            "ergodic_observable": self.ergodic_observable,
            "ergodic_epsilons": list(self.ergodic_epsilons),
            "ergodic_horizon": self.ergodic_horizon,
            "ergodic_paths": self.ergodic_paths,
            "ergodic_ratio_min": self.ergodic_ratio_min,
            "ergodic_ratio_max": self.ergodic_ratio_max,
            "ergodic_mean_tol": self.ergodic_mean_tol,
            "ergodic_step_exponent": self.ergodic_step_exponent,
        }


@dataclass
class VerifyReport:
    tests_run: list[str]
    C_target: np.ndarray
    b_bar: np.ndarray
    C_hat: Optional[np.ndarray] = None
    rel_error: Optional[float] = None
    mc_stderr: Optional[np.ndarray] = None
    b_hat: Optional[np.ndarray] = None
    b_hat_stderr: Optional[np.ndarray] = None
    crossvar_rel_error: Optional[float] = None
    crossvariation: Optional[CrossVariationResult] = None
    ergodic: Optional[ErgodicScaling] = None
    outcomes: list[CriterionOutcome] = field(default_factory=list)

    @property
    def ergodic_errors(self) -> Optional[list[float]]:
        return None if self.ergodic is None else self.ergodic.rms

    @property
    def passed(self) -> bool:
        return all(outcome.passed for outcome in self.outcomes)

    def as_dict(self) -> dict:
        payload: dict = {
            "tests_run": self.tests_run,
            "passed": self.passed,
            "C_target": self.C_target.tolist(),
            "b_bar": self.b_bar.tolist(),
            "criteria": {outcome.name: outcome.as_dict() for outcome in self.outcomes},
        }
        if "covariance" in self.tests_run:
            payload["covariance"] = {
                "C_hat": self.C_hat.tolist(),
                "rel_error": self.rel_error,
                "mc_stderr": self.mc_stderr.tolist(),
            }
        if "drift" in self.tests_run:
            payload["drift"] = {"b_hat": self.b_hat.tolist(), "stderr": self.b_hat_stderr.tolist()}
        if "crossvariation" in self.tests_run:
            payload["crossvariation"] = self.crossvariation.as_dict()
        if "ergodic" in self.tests_run:
            payload["ergodic"] = self.ergodic.as_dict()
        return payload


def _covariance_section(report: VerifyReport, model, sim_config, config: VerifyConfig, threads) -> None:
    eps, horizon = sim_config.epsilon, sim_config.horizon
    paths = simulate_paths(
        model, sim_config, per_path=lambda path: final_state(rescale_path(path, eps, horizon)), threads=threads
    )
    summary = summarize_ensemble(paths, report.b_bar, eps, horizon)

    if "covariance" in config.tests:
        report.C_hat = summary.covariance
        report.mc_stderr = summary.covariance_stderr
        report.rel_error = _relative_gap(summary.covariance, report.C_target)
        report.outcomes.append(
            CriterionOutcome(
                "covariance",
                report.rel_error <= config.covariance_tol,
                report.rel_error,
                config.covariance_tol,
                f"{summary.n_paths} paths, eps={eps:g}, T={horizon:g}",
            )
        )
    if "drift" in config.tests:
        report.b_hat, report.b_hat_stderr = summary.drift, summary.drift_stderr
        allowed = config.z_limit * summary.drift_stderr + config.drift_slack * (1.0 + np.abs(report.b_bar))
        gap = np.abs(summary.drift - report.b_bar)
        report.outcomes.append(
            CriterionOutcome(
                "drift",
                bool(np.all(gap <= allowed)),
                float(gap.max()),
                float(allowed.min()),
                "law of large numbers for eps X_T / T",
            )
        )


def run_verification(
    result: HomogenizationResult,
    model: SwitchingModel,
    grid: TorusGrid,
    config: VerifyConfig,
    sim_config: SimConfig,
    threads: Optional[int] = None,
    c_scale: float = 1.0,
) -> VerifyReport:
    """Run the selected checks against a homogenization result and set a pass flag per criterion."""

    sim_config.require_valid(validate_model(model, grid).max_total_rate, model.n_modes)
    report = VerifyReport(
        tests_run=[name for name in VERIFY_TESTS if name in config.tests],
        C_target=result.coefficients.C * c_scale,
        b_bar=np.asarray(result.b_bar, dtype=float),
    )

    if "covariance" in config.tests or "drift" in config.tests:
        _covariance_section(report, model, sim_config, config, threads)

    if "crossvariation" in config.tests:
        probe = CrossVariationProbe(model, grid, result.corrector, result.b_bar, sim_config.epsilon)
        cv_config = replace(sim_config, n_paths=config.crossvar_paths, record_stride=1)
        cross = summarize_crossvariation(simulate_paths(model, cv_config, per_path=probe, threads=threads))
        report.crossvariation = cross
        report.crossvar_rel_error = cross.rel_error
        report.outcomes.append(
            CriterionOutcome("crossvariation", cross.rel_error <= config.crossvar_tol, cross.rel_error, config.crossvar_tol)
        )
        z_max = float(cross.martingale_z.max())
        report.outcomes.append(
            CriterionOutcome("martingale_mean", z_max <= config.z_limit, z_max, config.z_limit, "max |mean| / stderr")
        )
        report.outcomes.append(
            CriterionOutcome("corrector_bound", cross.bound_excess <= 1e-9, cross.bound_excess, 1e-9)
        )

    if "ergodic" in config.tests:
        g = parse_observable(config.ergodic_observable, model)
        tabulated = tabulate_observable(grid, g, model.n_modes)
        g_bar = observable_mean(grid, result.density, tabulated)
        variance_rate = observable_variance(model, grid, result.operator, result.density, tabulated, result.settings)
        scaling = ergodic_scaling_test(
            model,
            g,
            config.ergodic_epsilons,
            config.ergodic_horizon,
            config.ergodic_paths,
            g_bar,
            base_config=sim_config,
            variance_rate=variance_rate,
            threads=threads,
            step_exponent=config.ergodic_step_exponent,
        )
        report.ergodic = scaling
        ratios = np.array(scaling.ratios)
        in_bracket = bool(np.all((ratios >= config.ergodic_ratio_min) & (ratios <= config.ergodic_ratio_max)))
        report.outcomes.append(
            CriterionOutcome(
                "ergodic_scaling",
                in_bracket,
                float(np.nanmin(ratios)) if np.any(np.isfinite(ratios)) else float("nan"),
                config.ergodic_ratio_min,
                f"successive RMS ratios {[round(r, 3) for r in scaling.ratios]}",
            )
        )
        gap = abs(scaling.means[-1] - g_bar)
        allowed = config.ergodic_mean_tol * max(abs(g_bar), 1.0)
        report.outcomes.append(CriterionOutcome("ergodic_mean", gap <= allowed, gap, allowed, f"g_bar={g_bar:.6g}"))

    logger.info(
        "Verification %s: %s", "passed" if report.passed else "failed", {o.name: o.passed for o in report.outcomes}
    )
    return report
