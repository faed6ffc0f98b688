"""Lagrange P1/P2 spaces on triangles: basis, quadrature, dof maps, interpolation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .mesh import Mesh, triangle_edges

CONTINUOUS = "continuous"
DISCONTINUOUS = "discontinuous"

# Reference Lagrange nodes: vertices, then midpoints of edges (0,1), (1,2), (2,0).
REF_NODES = {
    1: np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
    2: np.array(
        [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.0], [0.5, 0.5], [0.0, 0.5]]
    ),
}
N_LOCAL = {1: 3, 2: 6}
MAX_QUADRATURE_DEGREE = 8


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (nq, 2) reference coordinates
    weights: np.ndarray  # (nq,), sum 1/2
    degree: int


@lru_cache(maxsize=None)
def quadrature(d: int) -> QuadratureRule:
    """Collapsed Gauss rule on the reference triangle, exact to total degree ``d``.

    Gauss-Jacobi(1, 0) in the collapsed direction absorbs the Duffy Jacobian, so
    ``ceil((d + 1) / 2)`` points per direction suffice. All weights are positive.
    """
    if int(d) != d or not 1 <= d <= MAX_QUADRATURE_DEGREE:
        raise ValueError(f"quadrature degree must be in 1..{MAX_QUADRATURE_DEGREE}, got {d}")
    m = math.ceil((d + 1) / 2)
    tj, wj = roots_jacobi(m, 1.0, 0.0)  # weight (1 - t) on [-1, 1]
    tl, wl = roots_legendre(m)
    s = 0.5 * (1.0 + tj)  # collapsed coordinate, weight (1 - s)
    r = 0.5 * (1.0 + tl)
    S, R = np.meshgrid(s, r, indexing="ij")
    WS, WR = np.meshgrid(0.25 * wj, 0.5 * wl, indexing="ij")
    x = S.ravel()
    y = (R * (1.0 - S)).ravel()
    w = (WS * WR).ravel()
    return QuadratureRule(np.column_stack([x, y]), w, int(d))


@lru_cache(maxsize=None)
def segment_quadrature(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points and weights on [0, 1], exact to degree ``d``."""
    m = max(1, math.ceil((d + 1) / 2))
    t, w = roots_legendre(m)
    return 0.5 * (1.0 + t), 0.5 * w


def eval_basis(degree: int, points) -> tuple[np.ndarray, np.ndarray]:
    """Values ``(..., nloc)`` and reference gradients ``(..., nloc, 2)`` at ``points``."""
    p = np.asarray(points, dtype=float)
    x, y = p[..., 0], p[..., 1]
    l0, l1, l2 = 1.0 - x - y, x, y
    one = np.ones_like(x)
    zero = np.zeros_like(x)
    # barycentric gradients: (-1,-1), (1,0), (0,1)
    g0 = np.stack([-one, -one], axis=-1)
    g1 = np.stack([one, zero], axis=-1)
    g2 = np.stack([zero, one], axis=-1)
    if degree == 1:
        values = np.stack([l0, l1, l2], axis=-1)
        grads = np.stack([g0, g1, g2], axis=-2)
    elif degree == 2:
        values = np.stack(
            [
                l0 * (2 * l0 - 1),
                l1 * (2 * l1 - 1),
                l2 * (2 * l2 - 1),
                4 * l0 * l1,
                4 * l1 * l2,
                4 * l2 * l0,
            ],
            axis=-1,
        )
        L = [l0[..., None], l1[..., None], l2[..., None]]
        G = [g0, g1, g2]
        grads = np.stack(
            [
                (4 * L[0] - 1) * G[0],
                (4 * L[1] - 1) * G[1],
                (4 * L[2] - 1) * G[2],
                4 * (L[0] * G[1] + L[1] * G[0]),
                4 * (L[1] * G[2] + L[2] * G[1]),
                4 * (L[2] * G[0] + L[0] * G[2]),
            ],
            axis=-2,
        )
    else:
        raise ValueError(f"unsupported degree {degree}")
    return values, grads


@dataclass(frozen=True)
class FiniteElementSpace:
    mesh: Mesh
    continuity: str
    degree: int
    n_dofs: int
    cell_dofs: np.ndarray  # (nt, nloc)
    dof_coords: np.ndarray  # (n_dofs, 2)
    # affine maps x = origin + jac @ xi, per element
    origin: np.ndarray
    jac: np.ndarray
    det: np.ndarray
    inv_jac_t: np.ndarray

    @property
    def continuous(self) -> bool:
        return self.continuity == CONTINUOUS

    @property
    def n_local(self) -> int:
        return N_LOCAL[self.degree]

    def map_points(self, ref_points: np.ndarray, elements=None) -> np.ndarray:
        """Physical coordinates of reference points.

        ``ref_points`` is ``(nq, 2)`` (same points on every element) or
        ``(ne, nq, 2)`` (per element); returns ``(ne, nq, 2)``.
        """
        o = self.origin if elements is None else self.origin[elements]
        J = self.jac if elements is None else self.jac[elements]
        ref = np.asarray(ref_points)
        if ref.ndim == 2:
            return o[:, None, :] + np.einsum("eij,qj->eqi", J, ref)
        return o[:, None, :] + np.einsum("eij,eqj->eqi", J, ref)

    def physical_gradients(self, ref_grads: np.ndarray, elements=None) -> np.ndarray:
        """Map reference gradients ``(nq, nloc, 2)`` or ``(ne, nq, nloc, 2)`` to ``(ne, nq, nloc, 2)``."""
        K = self.inv_jac_t if elements is None else self.inv_jac_t[elements]
        if ref_grads.ndim == 3:
            return np.einsum("eij,qlj->eqli", K, ref_grads)
        return np.einsum("eij,eqlj->eqli", K, ref_grads)

    def evaluate(self, coeffs: np.ndarray, ref_points: np.ndarray, elements=None) -> np.ndarray:
        """Values of the discrete function at reference points, ``(ne, nq)``."""
        dofs = self.cell_dofs if elements is None else self.cell_dofs[elements]
        phi, _ = eval_basis(self.degree, ref_points)
        c = coeffs[dofs]
        if phi.ndim == 2:
            return np.einsum("ql,el->eq", phi, c)
        return np.einsum("eql,el->eq", phi, c)

    def evaluate_gradient(self, coeffs: np.ndarray, ref_points: np.ndarray, elements=None) -> np.ndarray:
        """Physical gradients of the discrete function, ``(ne, nq, 2)``."""
        dofs = self.cell_dofs if elements is None else self.cell_dofs[elements]
        _, dphi = eval_basis(self.degree, ref_points)
        g = self.physical_gradients(dphi, elements)
        return np.einsum("eqli,el->eqi", g, coeffs[dofs])


def build_space(mesh: Mesh, continuity: str = CONTINUOUS, degree: int = 1) -> FiniteElementSpace:
    if degree not in N_LOCAL:
        raise ValueError(f"unsupported polynomial degree {degree}; use 1 or 2")
    if continuity not in (CONTINUOUS, DISCONTINUOUS):
        raise ValueError(f"unknown continuity {continuity!r}")
    tris = mesh.triangles
    nt = len(tris)
    nloc = N_LOCAL[degree]
    p = mesh.vertices[tris]
    origin = p[:, 0]
    jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)  # columns are edge vectors
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    inv_jac_t = np.empty_like(jac)
    inv_jac_t[:, 0, 0] = jac[:, 1, 1] / det
    inv_jac_t[:, 0, 1] = -jac[:, 1, 0] / det
    inv_jac_t[:, 1, 0] = -jac[:, 0, 1] / det
    inv_jac_t[:, 1, 1] = jac[:, 0, 0] / det

    local_coords = origin[:, None, :] + np.einsum("eij,qj->eqi", jac, REF_NODES[degree])
    if continuity == DISCONTINUOUS:
        cell_dofs = np.arange(nt * nloc).reshape(nt, nloc)
        dof_coords = local_coords.reshape(-1, 2)
        n_dofs = nt * nloc
    elif degree == 1:
        cell_dofs = tris.copy()
        dof_coords = mesh.vertices.copy()
        n_dofs = mesh.n_vertices
    else:
        _, tri_edges = triangle_edges(tris)
        nv = mesh.n_vertices
        # local edge i is opposite local vertex i
        cell_dofs = np.column_stack(
            [tris, nv + tri_edges[:, 2], nv + tri_edges[:, 0], nv + tri_edges[:, 1]]
        )
        n_dofs = nv + len(mesh.edges)
        dof_coords = np.empty((n_dofs, 2))
        dof_coords[cell_dofs.ravel()] = local_coords.reshape(-1, 2)

    return FiniteElementSpace(
        mesh=mesh,
        continuity=continuity,
        degree=degree,
        n_dofs=int(n_dofs),
        cell_dofs=cell_dofs,
        dof_coords=dof_coords,
        origin=origin,
        jac=jac,
        det=det,
        inv_jac_t=inv_jac_t,
    )


def interpolate(space: FiniteElementSpace, f) -> np.ndarray:
    """Lagrange interpolant: coefficients are the values of ``f(x, y)`` at the dof nodes."""
    x = space.dof_coords
    values = np.asarray(f(x[:, 0], x[:, 1]), dtype=float)
    return np.broadcast_to(values, (space.n_dofs,)).copy()
