"""Error norms, convergence studies and the robustness sweep."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import assembly
from .cases import ProblemCase, clamped_speed, smooth_case
from .formulations import PRIMAL_DUAL, STANDARD, Solution, StabilizationConfig, solve_case
from .linalg import SolverError
from .mesh import build_structured, mesh_size
from .space import CONTINUOUS, DISCONTINUOUS, build_space, eval_basis, quadrature

log = logging.getLogger(__name__)


def error_degree(sol: Solution) -> int:
    return min(2 * sol.space.degree + 4, 8)


def _require_exact(case: ProblemCase, gradient: bool = False) -> None:
    if case.u is None or (gradient and case.grad_u is None):
        raise ValueError(f"case {case.name!r} has no exact solution{' gradient' if gradient else ''}")


def l2_error(sol: Solution, degree: int | None = None) -> float:
    _require_exact(sol.case)
    V = sol.space
    rule = quadrature(error_degree(sol) if degree is None else degree)
    X = V.map_points(rule.points)
    e = V.evaluate(sol.u, rule.points) - sol.case.u(X[..., 0], X[..., 1])
    return float(np.sqrt(np.sum(rule.weights * np.abs(V.det)[:, None] * e**2)))


def sd_error(sol: Solution, degree: int | None = None) -> float:
    """``|| h^{1/2} |beta|^{-1/2} beta . grad(u - u_h) ||`` with the global mesh size."""
    _require_exact(sol.case, gradient=True)
    V, case = sol.space, sol.case
    rule = quadrature(error_degree(sol) if degree is None else degree)
    X = V.map_points(rule.points)
    x, y = X[..., 0], X[..., 1]
    B = case.beta(x, y)
    de = case.grad_u(x, y) - V.evaluate_gradient(sol.u, rule.points)
    streamline = np.einsum("eqd,eqd->eq", B, de)
    weight = mesh_size(V.mesh) / clamped_speed(B, case.speed_floor)
    return float(np.sqrt(np.sum(rule.weights * np.abs(V.det)[:, None] * weight * streamline**2)))


def boundary_error(sol: Solution, degree: int | None = None) -> float:
    """``|| |beta . n|^{1/2} (u - u_h) ||_{dOmega}``."""
    _require_exact(sol.case)
    V, case = sol.space, sol.case
    fq, faces, ref = assembly.boundary_face_quad(V, error_degree(sol) if degree is None else degree)
    phi, _ = eval_basis(V.degree, ref)
    uh = np.einsum("fqi,fi->fq", phi, sol.u[V.cell_dofs[faces.bnd_elem]])
    x, y = fq.points[..., 0], fq.points[..., 1]
    bn = np.abs(np.einsum("fqd,fd->fq", case.beta(x, y), fq.normal))
    return float(np.sqrt(np.sum(fq.weights * bn * (case.u(x, y) - uh) ** 2)))


def stab_seminorm(x: np.ndarray, S) -> float:
    return float(np.sqrt(max(float(x @ (S @ x)), 0.0)))


def sp_error_seminorm(sol: Solution) -> float:
    """``|u - u_h|_{S_p}`` from ``s_p(u,u) - 2 s_p(u,u_h) + s_p(u_h,u_h)``, all expressible through data."""
    suu = assembly.data_energy(sol.space, sol.case, sol.config)
    value = suu - 2.0 * float(sol.G @ sol.u) + float(sol.u @ (sol.S_p @ sol.u))
    return math.sqrt(max(value, 0.0))


def dual_l2(sol: Solution) -> float | None:
    if sol.z is None:
        return None
    V = sol.space
    rule = quadrature(2 * V.degree + 2)
    z = V.evaluate(sol.z, rule.points)
    return float(np.sqrt(np.sum(rule.weights * np.abs(V.det)[:, None] * z**2)))


@dataclass
class LevelRecord:
    N: int
    h: float
    dofs: int
    l2: float | None = None
    sd: float | None = None
    boundary: float | None = None
    sp_seminorm: float | None = None
    z_l2: float | None = None
    z_sa: float | None = None
    residual: float | None = None
    failure: str | None = None


def rate(e_coarse, e_fine, N_coarse, N_fine) -> float | None:
    """Observed order between two levels with ``2**N`` cells per side."""
    if e_coarse is None or e_fine is None or not (e_coarse > 0.0 and e_fine > 0.0):
        return None
    return math.log(e_coarse / e_fine) / ((N_fine - N_coarse) * math.log(2.0))


@dataclass
class ErrorReport:
    case: str
    config: StabilizationConfig
    degree: int
    records: list[LevelRecord] = field(default_factory=list)

    def rates(self, attr: str) -> list[float | None]:
        """Rate of ``attr`` between each record and its predecessor (``None`` for the first)."""
        out: list[float | None] = [None]
        for prev, cur in zip(self.records, self.records[1:]):
            out.append(rate(getattr(prev, attr), getattr(cur, attr), prev.N, cur.N))
        return out

    def mean_rate(self, attr: str) -> float:
        r = [x for x in self.rates(attr) if x is not None]
        return float(np.mean(r)) if r else float("nan")

    def ls_rate(self, attr: str, last: int = 3) -> float:
        """Least-squares slope of ``-log2 e`` against ``N`` over the last ``last`` levels."""
        pts = [(r.N, getattr(r, attr)) for r in self.records if getattr(r, attr)]
        pts = [(N, e) for N, e in pts if e > 0.0][-last:]
        if len(pts) < 2:
            return float("nan")
        N, e = np.array(pts, dtype=float).T
        return float(-np.polyfit(N, np.log2(e), 1)[0])

    def record(self, N: int) -> LevelRecord:
        for r in self.records:
            if r.N == N:
                return r
        raise KeyError(N)


def measure(sol: Solution, N: int) -> LevelRecord:
    rec = LevelRecord(N=N, h=mesh_size(sol.space.mesh), dofs=sol.space.n_dofs, residual=sol.residual)
    if sol.case.u is not None:
        rec.l2 = l2_error(sol)
        rec.boundary = boundary_error(sol)
        if sol.case.grad_u is not None:
            rec.sd = sd_error(sol)
    if sol.config.gamma >= 0.0 and sol.config.gamma_bc >= 0.0:
        # with a negative parameter S_p is indefinite and the quantity is not a seminorm
        rec.sp_seminorm = sp_error_seminorm(sol)
    if sol.z is not None:
        rec.z_l2 = dual_l2(sol)
        rec.z_sa = stab_seminorm(sol.z, sol.S_a)
    return rec


def space_for(method: str, mesh, degree: int):
    return build_space(mesh, DISCONTINUOUS if method == "DG" else CONTINUOUS, degree)


def convergence_study(
    case: ProblemCase,
    config: StabilizationConfig,
    degree: int,
    levels,
    perturb: tuple[float, int] | None = None,
    diagonal: str = "right",
    on_solution=None,
) -> ErrorReport:
    """Solve on meshes with ``2**N`` cells per side for each ``N`` in ``levels``.

    A failed solve is recorded (``failure`` set, errors left empty) and the
    study carries on. ``on_solution(N, sol)`` is called after each successful solve.
    """
    levels = list(levels)
    if levels != sorted(levels):
        raise ValueError("levels must be ascending")
    report = ErrorReport(case.name, config, degree)
    for N in levels:
        mesh = build_structured(2**N, perturb, diagonal)
        V = space_for(config.method, mesh, degree)
        try:
            sol = solve_case(case, V, config)
        except SolverError as exc:
            log.warning("level N=%d failed: %s", N, exc)
            report.records.append(LevelRecord(N=N, h=mesh_size(mesh), dofs=V.n_dofs, failure=str(exc), residual=exc.residual))
            continue
        report.records.append(measure(sol, N))
        if on_solution is not None:
            on_solution(N, sol)
    return report


@dataclass
class SweepEntry:
    eps: float
    gamma: float
    formulation: str
    sd: float | None
    l2: float | None
    failure: str | None = None


def robustness_sweep(
    eps_list,
    gamma_list,
    n: int = 64,
    degree: int = 1,
    formulations=(PRIMAL_DUAL, STANDARD),
    perturb: tuple[float, int] | None = None,
    diagonal: str = "right",
) -> list[SweepEntry]:
    """SD error of the smooth solution under the velocity ``beta3(eps)`` for every (eps, gamma, formulation)."""
    mesh = build_structured(n, perturb, diagonal)
    V = build_space(mesh, CONTINUOUS, degree)
    out = []
    for eps in eps_list:
        case = smooth_case(3, eps)
        for gamma in gamma_list:
            for form in formulations:
                stab = StabilizationConfig.with_defaults("CIP", degree, form, gamma=gamma)
                try:
                    sol = solve_case(case, V, stab)
                except SolverError as exc:
                    out.append(SweepEntry(eps, gamma, form, None, None, str(exc)))
                    continue
                out.append(SweepEntry(eps, gamma, form, sd_error(sol), l2_error(sol)))
    return out
