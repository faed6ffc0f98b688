"""Sparse solves and the 2x2 block layout of the primal-dual system."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.io
import scipy.sparse as sp
from scipy.sparse.linalg import MatrixRankWarning, splu


class SolverError(RuntimeError):
    """Raised when a factorization breaks down or the residual contract is missed."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


def relative_residual(M, x, b) -> float:
    r = np.linalg.norm(M @ x - b)
    nb = np.linalg.norm(b)
    return float(r / nb) if nb > 0.0 else float(r)


def solve(M, b, tol: float = 1e-12, refine: int = 3) -> np.ndarray:
    """Sparse LU (SuperLU, COLAMD ordering) followed by a few steps of iterative refinement.

    Returns ``x`` with ``||Mx - b|| <= tol ||b||`` (absolute when ``b = 0``),
    otherwise raises :class:`SolverError` carrying the achieved residual.
    """
    M = sp.csc_matrix(M)
    b = np.asarray(b, dtype=float)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got {M.shape}")
    if M.shape[0] != b.shape[0]:
        raise ValueError(f"dimension mismatch: matrix {M.shape}, rhs {b.shape}")
    if not np.any(b):
        return np.zeros_like(b)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", MatrixRankWarning)
            lu = splu(M, permc_spec="COLAMD")
    except (RuntimeError, MatrixRankWarning) as exc:
        raise SolverError(f"sparse LU failed: {exc}") from exc
    x = lu.solve(b)
    res = relative_residual(M, x, b)
    for _ in range(refine):
        if res <= tol:
            break
        x = x + lu.solve(b - M @ x)
        res = relative_residual(M, x, b)
    if not np.all(np.isfinite(x)) or res > tol:
        raise SolverError(f"residual {res:.3e} above tolerance {tol:.1e} (singular or ill-conditioned matrix)", res)
    return x


@dataclass(frozen=True)
class BlockSystem:
    """Monolithic ``[[A, S_a], [-S_p, A^T]]`` acting on ``(U, Z)``: all U dofs first, then all Z dofs."""

    matrix: sp.csr_matrix
    n_primal: int
    n_dual: int

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return x[: self.n_primal], x[self.n_primal :]


def compose_block(A, S_a, S_p, transpose: bool = True) -> BlockSystem:
    """Stack the primal-dual operator.

    The second block row uses ``A^T`` (``transpose=True``), i.e. ``a_h(v_h, z_h)``
    with the roles of trial and test swapped.
    """
    A = sp.csr_matrix(A)
    n, m = A.shape
    if n != m:
        raise ValueError(f"advection matrix must be square, got {A.shape}")
    for name, S in (("S_a", S_a), ("S_p", S_p)):
        if S.shape != (n, n):
            raise ValueError(f"{name} has shape {S.shape}, expected {(n, n)}")
    lower_right = A.T if transpose else A
    M = sp.bmat([[A, S_a], [-S_p, lower_right]], format="csr")
    M.sort_indices()
    return BlockSystem(M, n, n)


def export_matrix_market(path, M, comment: str = "") -> None:
    scipy.io.mmwrite(str(path), sp.coo_matrix(M), comment=comment)
