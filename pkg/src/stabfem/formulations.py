"""Standard stabilized and primal-dual (optimisation based) discrete formulations."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from . import assembly
from .cases import INFLOW, OUTFLOW, ProblemCase
from .linalg import compose_block, relative_residual, solve
from .space import FiniteElementSpace, interpolate

METHODS = ("GLS", "CIP", "DG")
STANDARD = "standard"
PRIMAL_DUAL = "primal_dual"
FORMULATIONS = (STANDARD, PRIMAL_DUAL)


def default_gamma(method: str, degree: int) -> float:
    if method == "CIP":
        return 0.01 if degree == 1 else 0.001
    if method == "DG":
        return 0.5
    if method == "GLS":
        return 0.1
    raise ValueError(f"unknown method {method!r}")


def default_gamma_bc(formulation: str) -> float:
    return 0.5 if formulation == PRIMAL_DUAL else 1.0


@dataclass(frozen=True)
class StabilizationConfig:
    method: str = "CIP"
    gamma: float = 0.01
    gamma_bc: float = 0.5
    formulation: str = PRIMAL_DUAL
    data_side: str = INFLOW

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.formulation not in FORMULATIONS:
            raise ValueError(f"formulation must be one of {FORMULATIONS}, got {self.formulation!r}")
        if self.data_side not in (INFLOW, OUTFLOW):
            raise ValueError(f"data_side must be inflow or outflow, got {self.data_side!r}")

    @classmethod
    def with_defaults(
        cls,
        method: str = "CIP",
        degree: int = 1,
        formulation: str = PRIMAL_DUAL,
        data_side: str = INFLOW,
        gamma: float | None = None,
        gamma_bc: float | None = None,
    ) -> "StabilizationConfig":
        """Fill unspecified parameters with the experiment defaults for ``degree``."""
        return cls(
            method=method,
            gamma=default_gamma(method, degree) if gamma is None else float(gamma),
            gamma_bc=default_gamma_bc(formulation) if gamma_bc is None else float(gamma_bc),
            formulation=formulation,
            data_side=data_side,
        )

    def scaled(self, factor: float) -> "StabilizationConfig":
        return replace(self, gamma=self.gamma * factor, gamma_bc=self.gamma_bc * factor)


def check_compatible(stab: StabilizationConfig, space: FiniteElementSpace) -> None:
    if stab.method in ("GLS", "CIP") and not space.continuous:
        raise ValueError(f"{stab.method} requires a continuous space, got a discontinuous one")
    if stab.method == "DG" and space.continuous:
        raise ValueError("DG requires a discontinuous space, got a continuous one")


@dataclass
class Solution:
    u: np.ndarray
    z: np.ndarray | None
    space: FiniteElementSpace
    case: ProblemCase
    config: StabilizationConfig
    A: sp.csr_matrix
    S_p: sp.csr_matrix
    S_a: sp.csr_matrix | None
    F: np.ndarray  # (f, w)
    G: np.ndarray  # s_p(u, v) from data
    residual: float


def method_operator(space, case: ProblemCase, stab: StabilizationConfig, variant: str = "primal"):
    if stab.method == "GLS":
        return assembly.assemble_gls(
            space, case.beta, case.sigma, stab.gamma, variant, speed_floor=case.speed_floor
        )
    if stab.method == "CIP":
        return assembly.assemble_cip(space, case.beta, stab.gamma)
    return assembly.assemble_dg_jump(space, case.beta, stab.gamma)


def primal_stabilization(space, case, stab):
    """``s_p``: method term plus the boundary penalty on the data side."""
    return method_operator(space, case, stab, "primal") + assembly.assemble_boundary_penalty(
        space, case.beta, stab.gamma_bc, stab.data_side
    )


def adjoint_stabilization(space, case, stab):
    """``s_a``: method term plus the boundary penalty on the whole boundary."""
    return method_operator(space, case, stab, "adjoint") + assembly.assemble_boundary_penalty(
        space, case.beta, stab.gamma_bc, assembly.BOTH
    )


def _prepare(case: ProblemCase, space, stab):
    check_compatible(stab, space)
    if case.data_side != stab.data_side:
        case = case.with_data_side(stab.data_side)
    A = assembly.assemble_advection(space, case.beta, case.sigma)
    S_p = primal_stabilization(space, case, stab)
    F = assembly.load_vector(space, case.f)
    G = assembly.primal_data_vector(space, case, stab)
    return case, A, S_p, F, G


def solve_standard(case: ProblemCase, space: FiniteElementSpace, stab: StabilizationConfig, tol: float = 1e-12) -> Solution:
    """Solve ``(A + S_p) U = (f, .) + s_p(u, .)``."""
    if stab.formulation != STANDARD:
        stab = replace(stab, formulation=STANDARD)
    case, A, S_p, F, G = _prepare(case, space, stab)
    M = (A + S_p).tocsr()
    b = F + G
    u = solve(M, b, tol)
    return Solution(u, None, space, case, stab, A, S_p, None, F, G, relative_residual(M, u, b))


def solve_primal_dual(case: ProblemCase, space: FiniteElementSpace, stab: StabilizationConfig, tol: float = 1e-12) -> Solution:
    """Solve ``[[A, S_a], [-S_p, A^T]] (U, Z) = ((f, .), -s_p(u, .))``."""
    if stab.formulation != PRIMAL_DUAL:
        stab = replace(stab, formulation=PRIMAL_DUAL)
    case, A, S_p, F, G = _prepare(case, space, stab)
    S_a = adjoint_stabilization(space, case, stab)
    block = compose_block(A, S_a, S_p)
    b = np.concatenate([F, -G])
    x = solve(block.matrix, b, tol)
    u, z = block.split(x)
    return Solution(u, z, space, case, stab, A, S_p, S_a, F, G, relative_residual(block.matrix, x, b))


def solve_data_assimilation(case, space, stab: StabilizationConfig, tol: float = 1e-12) -> Solution:
    """Boundary data on the outflow boundary; either formulation (negative parameters allowed)."""
    stab = replace(stab, data_side=OUTFLOW)
    if stab.formulation == STANDARD:
        return solve_standard(case, space, stab, tol)
    return solve_primal_dual(case, space, stab, tol)


def solve_case(case, space, stab: StabilizationConfig, tol: float = 1e-12) -> Solution:
    if stab.formulation == STANDARD:
        return solve_standard(case, space, stab, tol)
    return solve_primal_dual(case, space, stab, tol)


def check_partial_coercivity(sol: Solution) -> float:
    """Relative defect of ``|z|_Sa^2 + |u|_Sp^2 = (f, z) + s_p(u, u_h)``."""
    if sol.z is None or sol.S_a is None:
        raise ValueError("partial coercivity needs a primal-dual solution")
    lhs = sol.z @ (sol.S_a @ sol.z) + sol.u @ (sol.S_p @ sol.u)
    rhs = sol.z @ sol.F + sol.u @ sol.G
    return float(abs(lhs - rhs) / max(1.0, abs(rhs)))


def check_galerkin_orthogonality(sol: Solution) -> tuple[float, float]:
    """Max defects of ``a_h(u - u_h, w) = s_a(z_h, w)`` and ``a_h(v, z_h) = s_p(u_h - u, v)`` over the basis.

    Only meaningful when the exact solution lies in the discrete space.
    """
    case, space = sol.case, sol.space
    if case.u is None or case.exact_degree is None or case.exact_degree > space.degree:
        raise ValueError("Galerkin orthogonality check needs an exact solution inside the discrete space")
    if sol.z is None:
        raise ValueError("Galerkin orthogonality check needs a primal-dual solution")
    e = interpolate(space, case.u) - sol.u
    r1 = sol.A @ e - sol.S_a @ sol.z
    r2 = sol.A.T @ sol.z + sol.S_p @ e
    return float(np.max(np.abs(r1), initial=0.0)), float(np.max(np.abs(r2), initial=0.0))
