"""Invariant density, cell problem and effective drift/covariance of a switching diffusion.

The discrete adjoint is the transpose of the assembled generator, so the Fredholm
compatibility of a right-hand side is the exact quantity ``w * sum(m * rhs)``.
Correctors are centered with the unweighted quadrature ``w * sum(Phi) = 0`` via a
bordered system whose border column is the density.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
from typing import Optional

import numpy as np
from scipy import sparse

from models.errors import DensityPositivityError, FredholmCompatibilityError, GridError, SolverError
from models.grid import GridFunction, TorusGrid, gradient, quadrature
from models.linear_solvers import SOLVER_CHOICES, Factorization, factorize
from models.operators import DiscreteOperator, assemble_generator, carre_du_champ_values
from models.switching import SwitchingModel


logger = logging.getLogger(__name__)

MULTIPLIER_TOL = 1e-8
INVERSE_ITERATION_MAX = 50


@dataclass(frozen=True)
class SolverSettings:
    density_tol: float = 1e-10
    cell_tol: float = 1e-8
    centering_tol: float = 1e-9
    linear_solver: str = "auto"

    def validate(self) -> tuple[bool, Optional[str]]:
        for name in ("density_tol", "cell_tol", "centering_tol"):
            if not getattr(self, name) > 0:
                return False, f"{name} must be positive."
        if self.linear_solver not in SOLVER_CHOICES:
            return False, f"linear_solver must be one of {', '.join(SOLVER_CHOICES)}."
        return True, None

    def as_dict(self) -> dict:
        return {
            "density_tol": self.density_tol,
            "cell_tol": self.cell_tol,
            "centering_tol": self.centering_tol,
            "linear_solver": self.linear_solver,
        }


@dataclass(frozen=True, eq=False)
class InvariantDensity:
    m: GridFunction
    residual: float
    normalization: float
    method: str = "row-replacement"

    @property
    def min_value(self) -> float:
        return float(self.m.values.min())


@dataclass(frozen=True, eq=False)
class PoissonSolution:
    u: GridFunction
    multiplier: float
    residual: float
    centering: float


@dataclass(frozen=True, eq=False)
class Corrector:
    """Phi_k per drift component; ``gradients[k, j]`` holds d_j Phi_k at every (node, mode)."""

    phi: tuple[GridFunction, ...]
    gradients: np.ndarray
    centering: tuple[float, ...]
    multipliers: tuple[float, ...]
    residuals: tuple[float, ...]

    @property
    def d(self) -> int:
        return len(self.phi)

    def nodal(self) -> np.ndarray:
        """Phi as an (N, m, d) array."""
        return np.stack([phi.by_mode() for phi in self.phi], axis=-1)

    def nodal_jacobian(self) -> np.ndarray:
        """D Phi as an (N, m, d, d) array indexed [node, mode, k, j]."""
        n_modes = self.phi[0].n_modes
        n_nodes = self.phi[0].n_nodes
        return self.gradients.reshape(self.d, self.d, n_nodes, n_modes).transpose(2, 3, 0, 1)


@dataclass(frozen=True)
class EffectiveCoefficients:
    b_bar: np.ndarray
    C: np.ndarray
    diffusive_part: np.ndarray
    switching_part: np.ndarray
    integrand_min_eigenvalue: float
    residuals: dict = field(default_factory=dict)
    grid_n: tuple[int, ...] = ()

    def as_dict(self) -> dict:
        return {
            "b_bar": self.b_bar.tolist(),
            "C": self.C.tolist(),
            "diffusive_part": self.diffusive_part.tolist(),
            "switching_part": self.switching_part.tolist(),
            "integrand_min_eigenvalue": self.integrand_min_eigenvalue,
            "residuals": self.residuals,
            "grid": {"n": list(self.grid_n)},
        }


@dataclass(frozen=True, eq=False)
class HomogenizationResult:
    operator: DiscreteOperator
    density: InvariantDensity
    b_bar: np.ndarray
    corrector: Corrector
    coefficients: EffectiveCoefficients
    settings: SolverSettings


def _row_replaced_adjoint(op: DiscreteOperator) -> sparse.csr_matrix:
    size = op.size
    keep = np.ones(size)
    keep[-1] = 0.0
    adjoint = sparse.diags(keep) @ op.matrix.T.tocsr()
    normalization_row = sparse.csr_matrix(
        (np.full(size, op.grid.weight), (np.full(size, size - 1), np.arange(size))), shape=(size, size)
    )
    return (adjoint + normalization_row).tocsr()


def _adjoint_residual(op: DiscreteOperator, values: np.ndarray) -> float:
    return float(np.abs(op.matrix.T @ values).max())


def _inverse_iteration(op: DiscreteOperator, tolerance: float, method: str) -> np.ndarray:
    norm = op.norm_inf
    shift = 1e-12 * norm
    factor = factorize(op.matrix.T + shift * sparse.identity(op.size), method)
    v = np.ones(op.size)
    for iteration in range(1, INVERSE_ITERATION_MAX + 1):
        v = factor.solve(v)
        v /= np.abs(v).max()
        if _adjoint_residual(op, v) <= tolerance * norm:
            logger.info("Inverse iteration converged after %d step(s)", iteration)
            return v
    raise SolverError(f"Inverse iteration for the invariant density did not converge in {INVERSE_ITERATION_MAX} steps.")


def solve_invariant_density(op: DiscreteOperator, grid: TorusGrid, density_tol: float = 1e-10, method: str = "auto") -> InvariantDensity:
    """Null vector of A^T normalized so that w * sum(m) = 1, with an inverse-iteration fallback."""

    norm = op.norm_inf
    rhs = np.zeros(op.size)
    rhs[-1] = 1.0
    used = "row-replacement"
    values: Optional[np.ndarray] = None
    try:
        values = factorize(_row_replaced_adjoint(op), method).solve(rhs)
        residual = _adjoint_residual(op, values)
        if not np.all(np.isfinite(values)) or residual > density_tol * norm * np.abs(values).max():
            logger.warning("Row-replacement density residual %.3e above tolerance; falling back to inverse iteration", residual)
            values = None
    except SolverError as exc:
        logger.warning("Row-replacement density solve failed (%s); falling back to inverse iteration", exc)

    if values is None:
        used = "inverse-iteration"
        values = _inverse_iteration(op, density_tol, method)

    values = values / (grid.weight * np.sum(values))
    if values.min() <= 0:
        raise DensityPositivityError(
            f"Computed invariant density has minimum {values.min():.3e} <= 0 on grid {grid.n}; refine the grid."
        )
    m = GridFunction(values, op.n_modes)
    residual = _adjoint_residual(op, values)
    normalization = quadrature(grid, m)
    logger.info("Invariant density (%s): residual %.3e, min %.4g, max %.4g", used, residual, values.min(), values.max())
    return InvariantDensity(m=m, residual=residual, normalization=normalization, method=used)


def observable_mean(grid: TorusGrid, density: InvariantDensity, g: GridFunction) -> float:
    """sum_alpha integral of g * m."""
    if g.values.size != density.m.values.size:
        raise GridError("Observable and density sizes differ.")
    return quadrature(grid, GridFunction(g.values * density.m.values, g.n_modes))


def effective_drift(model: SwitchingModel, grid: TorusGrid, density: InvariantDensity) -> np.ndarray:
    drift = model.drift_at(grid.coordinates)
    return np.array(
        [observable_mean(grid, density, GridFunction.from_nodal(drift[:, :, k])) for k in range(model.d)]
    )


def check_solvability(density: InvariantDensity, rhs: GridFunction, grid: TorusGrid) -> float:
    return observable_mean(grid, density, rhs)


class BorderedSystem:
    """[[A, m], [w 1^T, 0]] factorized once and reused for every right-hand side."""

    def __init__(self, op: DiscreteOperator, density: InvariantDensity, method: str = "auto"):
        self.op = op
        self.density = density
        size = op.size
        border = sparse.csr_matrix(density.m.values.reshape(-1, 1))
        constraint = sparse.csr_matrix(np.full((1, size), op.grid.weight))
        self.matrix = sparse.bmat([[op.matrix, border], [constraint, None]], format="csc")
        self._factor: Optional[Factorization] = None
        self.method = method

    @property
    def factor(self) -> Factorization:
        if self._factor is None:
            self._factor = factorize(self.matrix, self.method)
        return self._factor

    def solve(
        self,
        rhs: GridFunction,
        component: int = 1,
        centering_tol: float = 1e-9,
        cell_tol: float = 1e-8,
    ) -> PoissonSolution:
        grid = self.op.grid
        functional = check_solvability(self.density, rhs, grid)
        if abs(functional) > centering_tol:
            raise FredholmCompatibilityError(component, functional, centering_tol)

        solution = self.factor.solve(np.append(rhs.values, 0.0))
        u, multiplier = solution[:-1], float(solution[-1])
        if abs(multiplier) > MULTIPLIER_TOL:
            raise SolverError(f"Border multiplier {multiplier:.3e} for component {component} exceeds {MULTIPLIER_TOL:g}.")

        residual = float(np.abs(self.op.matrix @ u - rhs.values).max())
        rhs_norm = float(np.abs(rhs.values).max())
        floor = np.finfo(float).eps * self.op.norm_inf * max(float(np.abs(u).max()), 1.0)
        if residual > cell_tol * max(rhs_norm, floor):
            raise SolverError(f"Cell residual {residual:.3e} for component {component} exceeds cell_tol relative bound.")

        u_function = GridFunction(u, rhs.n_modes)
        return PoissonSolution(u=u_function, multiplier=multiplier, residual=residual, centering=quadrature(grid, u_function))


def solve_poisson(
    op: DiscreteOperator,
    grid: TorusGrid,
    density: InvariantDensity,
    rhs: GridFunction,
    centering_tol: float = 1e-9,
    cell_tol: float = 1e-8,
    method: str = "auto",
) -> PoissonSolution:
    """Solve A u = rhs subject to w * sum(u) = 0."""
    return BorderedSystem(op, density, method).solve(rhs, centering_tol=centering_tol, cell_tol=cell_tol)


def solve_corrector(
    op: DiscreteOperator,
    grid: TorusGrid,
    density: InvariantDensity,
    b_bar: np.ndarray,
    model: SwitchingModel,
    settings: SolverSettings = SolverSettings(),
    uncentered_offset: float = 0.0,
    system: Optional[BorderedSystem] = None,
) -> Corrector:
    """Cell problem A Phi_k = b_k - b_bar_k for each drift component k."""

    system = system or BorderedSystem(op, density, settings.linear_solver)
    drift = model.drift_at(grid.coordinates)
    solutions: list[PoissonSolution] = []
    for k in range(model.d):
        rhs = GridFunction.from_nodal(drift[:, :, k] - b_bar[k] + uncentered_offset)
        solutions.append(system.solve(rhs, k + 1, settings.centering_tol, settings.cell_tol))

    phi = tuple(solution.u for solution in solutions)
    gradients = np.stack([gradient(grid, component) for component in phi])
    logger.info(
        "Corrector solved: max |Phi| %.4g, max residual %.3e",
        max(float(np.abs(p.values).max()) for p in phi),
        max(solution.residual for solution in solutions),
    )
    return Corrector(
        phi=phi,
        gradients=gradients,
        centering=tuple(solution.centering for solution in solutions),
        multipliers=tuple(solution.multiplier for solution in solutions),
        residuals=tuple(solution.residual for solution in solutions),
    )


def _symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + np.swapaxes(matrix, -1, -2))


def covariance_integrands(model: SwitchingModel, grid: TorusGrid, corrector: Corrector) -> tuple[np.ndarray, np.ndarray]:
    """Nodal (I - D Phi) a (I - D Phi)^T and Q(Phi_k, Phi_l), each of shape (N, m, d, d)."""

    diffusion = model.diffusion_at(grid.coordinates)
    rates = model.rates_at(grid.coordinates)
    reduced = np.eye(model.d) - corrector.nodal_jacobian()
    diffusive = np.einsum("naki,naij,nalj->nakl", reduced, diffusion, reduced)

    phi = corrector.nodal()
    switching = np.empty_like(diffusive)
    for k in range(model.d):
        for l in range(model.d):
            switching[:, :, k, l] = carre_du_champ_values(rates, phi[:, :, k], phi[:, :, l])
    return diffusive, switching


def effective_covariance(
    model: SwitchingModel,
    grid: TorusGrid,
    density: InvariantDensity,
    corrector: Corrector,
    b_bar: Optional[np.ndarray] = None,
) -> EffectiveCoefficients:
    diffusive, switching = covariance_integrands(model, grid, corrector)
    weights = density.m.by_mode()[:, :, None, None]
    diffusive_part = _symmetrize(grid.weight * np.sum(diffusive * weights, axis=(0, 1)))
    switching_part = _symmetrize(grid.weight * np.sum(switching * weights, axis=(0, 1)))
    integrand_min = float(np.linalg.eigvalsh(_symmetrize(diffusive + switching))[..., 0].min())
    if b_bar is None:
        b_bar = effective_drift(model, grid, density)

    return EffectiveCoefficients(
        b_bar=np.asarray(b_bar, dtype=float),
        C=diffusive_part + switching_part,
        diffusive_part=diffusive_part,
        switching_part=switching_part,
        integrand_min_eigenvalue=integrand_min,
        residuals={
            "density": density.residual,
            "density_normalization": density.normalization,
            "density_method": density.method,
            "corrector": list(corrector.residuals),
            "corrector_multipliers": list(corrector.multipliers),
            "corrector_centering": list(corrector.centering),
        },
        grid_n=grid.n,
    )


def observable_variance(
    model: SwitchingModel,
    grid: TorusGrid,
    op: DiscreteOperator,
    density: InvariantDensity,
    g: GridFunction,
    settings: SolverSettings = SolverSettings(),
    system: Optional[BorderedSystem] = None,
) -> float:
    """Asymptotic variance rate of the time integral of g: sum_alpha integral (grad f.a grad f + Q(f,f)) m with A f = g - g_bar."""

    system = system or BorderedSystem(op, density, settings.linear_solver)
    g_bar = observable_mean(grid, density, g)
    centered = GridFunction(g.values - g_bar, g.n_modes)
    f = system.solve(centered, centering_tol=settings.centering_tol, cell_tol=settings.cell_tol).u

    grad = gradient(grid, f).T.reshape(grid.size, model.n_modes, model.d)
    diffusion = model.diffusion_at(grid.coordinates)
    diffusive = np.einsum("naj,najk,nak->na", grad, diffusion, grad)
    switching = carre_du_champ_values(model.rates_at(grid.coordinates), f.by_mode(), f.by_mode())
    integrand = GridFunction.from_nodal(diffusive + switching)
    return observable_mean(grid, density, integrand)


def homogenize(
    model: SwitchingModel,
    grid: TorusGrid,
    settings: SolverSettings = SolverSettings(),
    uncentered_offset: float = 0.0,
) -> HomogenizationResult:
    """Density, effective drift, corrector and effective covariance on one grid."""

    op = assemble_generator(model, grid)
    density = solve_invariant_density(op, grid, settings.density_tol, settings.linear_solver)
    b_bar = effective_drift(model, grid, density)
    corrector = solve_corrector(op, grid, density, b_bar, model, settings, uncentered_offset)
    coefficients = effective_covariance(model, grid, density, corrector, b_bar)
    logger.info("Homogenized %s on grid %s: b_bar=%s C=%s", model.name or "model", grid.n, b_bar.tolist(), coefficients.C.tolist())
    return HomogenizationResult(op, density, b_bar, corrector, coefficients, settings)


def restore_homogenization(
    model: SwitchingModel,
    grid: TorusGrid,
    density_values: np.ndarray,
    phi_values: list[np.ndarray],
    settings: SolverSettings = SolverSettings(),
) -> HomogenizationResult:
    """Rebuild a result from stored density and corrector values without re-solving."""

    op = assemble_generator(model, grid)
    m = GridFunction(density_values, model.n_modes)
    if m.values.size != op.size or len(phi_values) != model.d:
        raise GridError("Stored density or corrector does not match the model and grid.")
    density = InvariantDensity(
        m=m, residual=_adjoint_residual(op, m.values), normalization=quadrature(grid, m), method="restored"
    )
    b_bar = effective_drift(model, grid, density)
    drift = model.drift_at(grid.coordinates)
    phi = tuple(GridFunction(values, model.n_modes) for values in phi_values)
    residuals = tuple(
        float(np.abs(op.matrix @ component.values - (drift[:, :, k] - b_bar[k]).ravel()).max())
        for k, component in enumerate(phi)
    )
    corrector = Corrector(
        phi=phi,
        gradients=np.stack([gradient(grid, component) for component in phi]),
        centering=tuple(quadrature(grid, component) for component in phi),
        multipliers=tuple(0.0 for _ in phi),
        residuals=residuals,
    )
    coefficients = effective_covariance(model, grid, density, corrector, b_bar)
    return HomogenizationResult(op, density, b_bar, corrector, coefficients, settings)
