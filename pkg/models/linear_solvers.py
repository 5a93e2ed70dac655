"""Sparse LU or preconditioned GMRES behind one solve(rhs) interface."""

from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from models.errors import SolverError


logger = logging.getLogger(__name__)

DIRECT_LIMIT = 200_000
SOLVER_CHOICES = ("auto", "direct", "krylov")

_GMRES_REASONS = {0: "successful exit", 1: "iteration limit reached", -1: "illegal input or breakdown"}


@dataclass(frozen=True)
class Factorization:
    method: str
    size: int
    solve: Callable[[np.ndarray], np.ndarray]


def choose_method(size: int, requested: str = "auto") -> str:
    if requested not in SOLVER_CHOICES:
        raise ValueError(f"Unknown linear solver {requested!r}; expected one of {SOLVER_CHOICES}.")
    if requested != "auto":
        return requested
    return "direct" if size <= DIRECT_LIMIT else "krylov"


def _direct(matrix: sparse.csc_matrix) -> Factorization:
    try:
        lu = spla.splu(matrix)
    except RuntimeError as exc:
        raise SolverError(f"Sparse LU factorization failed: {exc}") from exc
    return Factorization("direct", matrix.shape[0], lu.solve)


def _krylov(matrix: sparse.csc_matrix, rtol: float, restart: int, maxiter: int) -> Factorization:
    try:
        ilu = spla.spilu(matrix, drop_tol=1e-5, fill_factor=20)
        preconditioner = spla.LinearOperator(matrix.shape, ilu.solve)
    except RuntimeError as exc:
        logger.warning("Incomplete LU failed (%s); running GMRES without preconditioner", exc)
        preconditioner = None

    def solve(rhs: np.ndarray) -> np.ndarray:
        solution, info = spla.gmres(matrix, rhs, rtol=rtol, restart=restart, maxiter=maxiter, M=preconditioner)
        if info != 0:
            reason = _GMRES_REASONS.get(int(np.sign(info)), "unknown")
            raise SolverError(f"GMRES did not converge ({reason}, info={info}).")
        return solution

    return Factorization("krylov", matrix.shape[0], solve)


def factorize(
    matrix: sparse.spmatrix,
    method: str = "auto",
    rtol: float = 1e-12,
    restart: int = 200,
    maxiter: int = 1000,
) -> Factorization:
    matrix = sparse.csc_matrix(matrix)
    chosen = choose_method(matrix.shape[0], method)
    logger.info("Factorizing %d x %d system with %s solver", matrix.shape[0], matrix.shape[1], chosen)
    if chosen == "direct":
        return _direct(matrix)
    return _krylov(matrix, rtol, restart, maxiter)
