"""Matrices and load vectors of the advection form, the stabilizations and the boundary penalties.

Row index = test function, column index = trial function throughout, so
``A[i, j] = a_h(phi_j, psi_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse as sp

from .cases import INFLOW, OUTFLOW, ProblemCase, VectorField, clamped_speed
from .mesh import FaceSet, build_faces, mesh_size
from .space import REF_NODES, FiniteElementSpace, eval_basis, quadrature, segment_quadrature

if TYPE_CHECKING:
    from .formulations import StabilizationConfig

BOTH = "both"
REF_VERTICES = REF_NODES[1]


def default_degree(space: FiniteElementSpace) -> int:
    """Assembly quadrature exactness, elements and faces alike."""
    return 2 * space.degree + 2


@lru_cache(maxsize=16)
def _faces(mesh) -> FaceSet:
    return build_faces(mesh)


def faces_of(space: FiniteElementSpace) -> FaceSet:
    return _faces(space.mesh)


def scatter(rows: np.ndarray, cols: np.ndarray, local: np.ndarray, shape: tuple[int, int]) -> sp.csr_matrix:
    """Sum local blocks ``local[e, i, j]`` into a CSR matrix at ``(rows[e, i], cols[e, j])``."""
    ne, nr, nc = local.shape
    R = np.broadcast_to(rows[:, :, None], (ne, nr, nc)).ravel()
    C = np.broadcast_to(cols[:, None, :], (ne, nr, nc)).ravel()
    M = sp.coo_matrix((local.ravel(), (R, C)), shape=shape).tocsr()
    M.sum_duplicates()
    M.sort_indices()
    return M


def scatter_vector(dofs: np.ndarray, local: np.ndarray, n: int) -> np.ndarray:
    return np.bincount(dofs.ravel(), weights=local.ravel(), minlength=n)


@dataclass(frozen=True)
class ElementQuad:
    points: np.ndarray  # (ne, nq, 2) physical
    weights: np.ndarray  # (ne, nq), includes |det J|
    phi: np.ndarray  # (nq, nloc)
    grad: np.ndarray  # (ne, nq, nloc, 2) physical


def element_quad(space: FiniteElementSpace, degree: int | None = None) -> ElementQuad:
    rule = quadrature(default_degree(space) if degree is None else degree)
    phi, dphi = eval_basis(space.degree, rule.points)
    return ElementQuad(
        points=space.map_points(rule.points),
        weights=rule.weights[None, :] * np.abs(space.det)[:, None],
        phi=phi,
        grad=space.physical_gradients(dphi),
    )


@dataclass(frozen=True)
class FaceQuad:
    points: np.ndarray  # (nf, nq, 2)
    weights: np.ndarray  # (nf, nq), includes face length
    normal: np.ndarray  # (nf, 2)
    length: np.ndarray  # (nf,)


def _segment_ref(local: np.ndarray, t: np.ndarray) -> np.ndarray:
    a = REF_VERTICES[local[:, 0]]
    b = REF_VERTICES[local[:, 1]]
    return a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]


def interior_face_quad(space, degree=None):
    """Quadrature on interior faces plus reference points seen from each neighbour."""
    faces = faces_of(space)
    t, w = segment_quadrature(default_degree(space) if degree is None else degree)
    ends = faces.endpoints
    pts = ends[:, 0][:, None, :] + t[None, :, None] * (ends[:, 1] - ends[:, 0])[:, None, :]
    fq = FaceQuad(pts, w[None, :] * faces.length[:, None], faces.normal, faces.length)
    return fq, faces, _segment_ref(faces.local_minus, t), _segment_ref(faces.local_plus, t)


def boundary_face_quad(space, degree=None):
    faces = faces_of(space)
    t, w = segment_quadrature(default_degree(space) if degree is None else degree)
    ends = faces.bnd_endpoints
    pts = ends[:, 0][:, None, :] + t[None, :, None] * (ends[:, 1] - ends[:, 0])[:, None, :]
    fq = FaceQuad(pts, w[None, :] * faces.bnd_length[:, None], faces.bnd_normal, faces.bnd_length)
    return fq, faces, _segment_ref(faces.bnd_local, t)


def _xy(points):
    return points[..., 0], points[..., 1]


def _check_pair(trial: FiniteElementSpace, test: FiniteElementSpace) -> None:
    if trial.mesh is not test.mesh:
        raise ValueError("trial and test spaces live on different meshes")


def assemble_advection(
    trial: FiniteElementSpace,
    beta: VectorField,
    sigma,
    test: FiniteElementSpace | None = None,
    degree: int | None = None,
) -> sp.csr_matrix:
    """``a_h(u, v) = (beta . grad u + sigma u, v)_h - sum_F int_F beta . n_F [u] {v}``.

    The face sum only appears for discontinuous trial spaces; ``[u] = u^- - u^+``
    with ``n_F`` pointing from the minus to the plus element.
    """
    test = trial if test is None else test
    _check_pair(trial, test)
    deg = max(default_degree(trial), default_degree(test)) if degree is None else degree
    rule = quadrature(deg)
    phi_u, dphi_u = eval_basis(trial.degree, rule.points)
    phi_v, _ = eval_basis(test.degree, rule.points)
    X = trial.map_points(rule.points)
    W = rule.weights[None, :] * np.abs(trial.det)[:, None]
    B = beta(*_xy(X))
    S = np.asarray(sigma(*_xy(X)), dtype=float)
    G = trial.physical_gradients(dphi_u)
    Lphi = np.einsum("eqd,eqjd->eqj", B, G) + S[..., None] * phi_u[None]
    local = np.einsum("eq,qi,eqj->eij", W, phi_v, Lphi)
    A = scatter(test.cell_dofs, trial.cell_dofs, local, (test.n_dofs, trial.n_dofs))

    if not trial.continuous:
        fq, faces, ref_m, ref_p = interior_face_quad(trial, deg)
        bn = np.einsum("fqd,fd->fq", beta(*_xy(fq.points)), fq.normal)
        um, _ = eval_basis(trial.degree, ref_m)
        up, _ = eval_basis(trial.degree, ref_p)
        vm, _ = eval_basis(test.degree, ref_m)
        vp, _ = eval_basis(test.degree, ref_p)
        jump_u = np.concatenate([um, -up], axis=-1)
        avg_v = 0.5 * np.concatenate([vm, vp], axis=-1)
        local_f = -np.einsum("fq,fqi,fqj->fij", fq.weights * bn, avg_v, jump_u)
        rows = np.concatenate([test.cell_dofs[faces.elem_minus], test.cell_dofs[faces.elem_plus]], axis=1)
        cols = np.concatenate([trial.cell_dofs[faces.elem_minus], trial.cell_dofs[faces.elem_plus]], axis=1)
        A = A + scatter(rows, cols, local_f, A.shape)
        A.sort_indices()
    return A


def _residual_basis(space, beta, sigma, variant, eq: ElementQuad) -> np.ndarray:
    """``L phi`` (primal) or ``L* phi`` (adjoint) at quadrature points, ``(ne, nq, nloc)``."""
    x, y = _xy(eq.points)
    B = beta(x, y)
    S = np.asarray(sigma(x, y), dtype=float)
    adv = np.einsum("eqd,eqjd->eqj", B, eq.grad)
    if variant == "primal":
        return adv + S[..., None] * eq.phi[None]
    if variant == "adjoint":
        # L* v = -div(beta v) + sigma v
        D = np.asarray(beta.divergence(x, y), dtype=float)
        return -adv + (S - D)[..., None] * eq.phi[None]
    raise ValueError(f"variant must be 'primal' or 'adjoint', got {variant!r}")


def gls_weight(space, beta_values, gamma, floor) -> np.ndarray:
    return gamma * mesh_size(space.mesh) / clamped_speed(beta_values, floor)


def assemble_gls(
    space: FiniteElementSpace,
    beta: VectorField,
    sigma,
    gamma: float,
    variant: str = "primal",
    degree: int | None = None,
    speed_floor: float = 1e-10,
) -> sp.csr_matrix:
    """Least-squares residual penalty ``(gamma h |beta|^-1 L u, L w)`` (``L*`` for the adjoint variant)."""
    if not space.continuous:
        raise ValueError("GLS stabilization requires a continuous space")
    eq = element_quad(space, degree)
    Lphi = _residual_basis(space, beta, sigma, variant, eq)
    tau = gls_weight(space, beta(*_xy(eq.points)), gamma, speed_floor)
    local = np.einsum("eq,eqi,eqj->eij", eq.weights * tau, Lphi, Lphi)
    return scatter(space.cell_dofs, space.cell_dofs, local, (space.n_dofs, space.n_dofs))


def cip_face_weight(beta: VectorField, faces: FaceSet) -> np.ndarray:
    """``h_F^2 max |beta_h . n_F|`` on every interior face.

    ``beta_h`` is the elementwise affine interpolant, so along a face it is
    affine and its extreme values sit at the endpoints (shared by both sides).
    """
    ends = faces.endpoints
    bn = np.abs(np.einsum("fkd,fd->fk", beta(ends[..., 0], ends[..., 1]), faces.normal))
    return faces.length**2 * bn.max(axis=1)


def assemble_cip(space: FiniteElementSpace, beta: VectorField, gamma: float, degree: int | None = None) -> sp.csr_matrix:
    """Gradient-jump penalty ``sum_F int_F gamma h_F^2 ||beta_h . n_F||_inf [grad u] . [grad w]``."""
    if not space.continuous:
        raise ValueError("CIP stabilization requires a continuous space")
    fq, faces, ref_m, ref_p = interior_face_quad(space, degree)
    _, dm = eval_basis(space.degree, ref_m)
    _, dp = eval_basis(space.degree, ref_p)
    gm = space.physical_gradients(dm, faces.elem_minus)
    gp = space.physical_gradients(dp, faces.elem_plus)
    jump = np.concatenate([gm, -gp], axis=2)  # (nf, nq, 2*nloc, 2)
    c = gamma * cip_face_weight(beta, faces)
    local = np.einsum("fq,fqid,fqjd->fij", fq.weights * c[:, None], jump, jump)
    dofs = np.concatenate([space.cell_dofs[faces.elem_minus], space.cell_dofs[faces.elem_plus]], axis=1)
    return scatter(dofs, dofs, local, (space.n_dofs, space.n_dofs))


def assemble_dg_jump(space: FiniteElementSpace, beta: VectorField, gamma: float, degree: int | None = None) -> sp.csr_matrix:
    """Solution-jump penalty ``sum_F int_F gamma |beta . n_F| [u][w]``."""
    if space.continuous:
        raise ValueError("DG jump stabilization requires a discontinuous space")
    fq, faces, ref_m, ref_p = interior_face_quad(space, degree)
    pm, _ = eval_basis(space.degree, ref_m)
    pp, _ = eval_basis(space.degree, ref_p)
    jump = np.concatenate([pm, -pp], axis=-1)
    bn = np.abs(np.einsum("fqd,fd->fq", beta(*_xy(fq.points)), fq.normal))
    local = np.einsum("fq,fqi,fqj->fij", gamma * fq.weights * bn, jump, jump)
    dofs = np.concatenate([space.cell_dofs[faces.elem_minus], space.cell_dofs[faces.elem_plus]], axis=1)
    return scatter(dofs, dofs, local, (space.n_dofs, space.n_dofs))


def _flux_part(bn: np.ndarray, side: str) -> np.ndarray:
    if side == INFLOW:
        return np.abs(np.minimum(bn, 0.0))
    if side == OUTFLOW:
        return np.maximum(bn, 0.0)
    if side == BOTH:
        return np.abs(bn)
    raise ValueError(f"side must be inflow, outflow or both, got {side!r}")


def assemble_boundary_penalty(
    space: FiniteElementSpace, beta: VectorField, gamma_bc: float, side: str, degree: int | None = None
) -> sp.csr_matrix:
    """``int_{dOmega} gamma_bc |(beta . n)_-+| u v``; inflow uses the negative part, outflow the positive."""
    fq, faces, ref = boundary_face_quad(space, degree)
    phi, _ = eval_basis(space.degree, ref)
    bn = np.einsum("fqd,fd->fq", beta(*_xy(fq.points)), fq.normal)
    wgt = gamma_bc * fq.weights * _flux_part(bn, side)
    local = np.einsum("fq,fqi,fqj->fij", wgt, phi, phi)
    dofs = space.cell_dofs[faces.bnd_elem]
    return scatter(dofs, dofs, local, (space.n_dofs, space.n_dofs))


def load_vector(space: FiniteElementSpace, f, degree: int | None = None) -> np.ndarray:
    """``(f, v_i)`` for every basis function."""
    eq = element_quad(space, degree)
    F = np.asarray(f(*_xy(eq.points)), dtype=float)
    local = np.einsum("eq,qi->ei", eq.weights * F, eq.phi)
    return scatter_vector(space.cell_dofs, local, space.n_dofs)


def gls_data_vector(space, case: ProblemCase, gamma: float, degree: int | None = None) -> np.ndarray:
    """``(f, gamma h |beta|^-1 L v_i)``, which equals ``s_GLS(u, v_i)`` for the exact solution."""
    eq = element_quad(space, degree)
    x, y = _xy(eq.points)
    Lphi = _residual_basis(space, case.beta, case.sigma, "primal", eq)
    tau = gls_weight(space, case.beta(x, y), gamma, case.speed_floor)
    F = np.asarray(case.f(x, y), dtype=float)
    local = np.einsum("eq,eqi->ei", eq.weights * tau * F, Lphi)
    return scatter_vector(space.cell_dofs, local, space.n_dofs)


def boundary_data_vector(space, case: ProblemCase, gamma_bc: float, side: str, degree: int | None = None) -> np.ndarray:
    """``int gamma_bc |(beta . n)_-+| g v_i``."""
    fq, faces, ref = boundary_face_quad(space, degree)
    phi, _ = eval_basis(space.degree, ref)
    x, y = _xy(fq.points)
    bn = np.einsum("fqd,fd->fq", case.beta(x, y), fq.normal)
    G = np.asarray(case.g(x, y), dtype=float)
    local = np.einsum("fq,fqi->fi", gamma_bc * fq.weights * _flux_part(bn, side) * G, phi)
    return scatter_vector(space.cell_dofs[faces.bnd_elem], local, space.n_dofs)


def primal_data_vector(space, case: ProblemCase, stab: "StabilizationConfig") -> np.ndarray:
    """``s_p(u, v_i)`` expressed through the data: GLS source term plus boundary data."""
    G = boundary_data_vector(space, case, stab.gamma_bc, stab.data_side)
    if stab.method == "GLS":
        G = G + gls_data_vector(space, case, stab.gamma)
    return G


def data_energy(space, case: ProblemCase, stab: "StabilizationConfig") -> float:
    """``s_p(u, u)`` evaluated from the data alone."""
    fq, _, _ = boundary_face_quad(space)
    x, y = _xy(fq.points)
    bn = np.einsum("fqd,fd->fq", case.beta(x, y), fq.normal)
    G = np.asarray(case.g(x, y), dtype=float)
    total = stab.gamma_bc * np.sum(fq.weights * _flux_part(bn, stab.data_side) * G**2)
    if stab.method == "GLS":
        eq = element_quad(space)
        x, y = _xy(eq.points)
        tau = gls_weight(space, case.beta(x, y), stab.gamma, case.speed_floor)
        total += np.sum(eq.weights * tau * np.asarray(case.f(x, y), dtype=float) ** 2)
    return float(total)


def assemble_rhs(space, case: ProblemCase, stab: "StabilizationConfig", target: str) -> np.ndarray:
    """Right-hand sides.

    ``primal_eq``: ``(f, w)`` for the primal-dual system, ``(f, v) + s_p(u, v)``
    for the standard formulation. ``dual_eq``: ``-s_p(u, v)``.
    """
    if stab.gamma_bc != 0.0 and case.g is None:
        raise ValueError("boundary penalty active but the case has no boundary data")
    if target == "primal_eq":
        F = load_vector(space, case.f)
        if stab.formulation == "standard":
            F = F + primal_data_vector(space, case, stab)
        return F
    if target == "dual_eq":
        return -primal_data_vector(space, case, stab)
    raise ValueError(f"target must be 'primal_eq' or 'dual_eq', got {target!r}")
