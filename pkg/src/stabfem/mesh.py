"""Structured triangulations of the unit square and their face connectivity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Boundary markers, in the order used by ``Mesh.boundary_marker``.
LEFT, RIGHT, BOTTOM, TOP = 0, 1, 2, 3
MARKER_NAMES = {LEFT: "left", RIGHT: "right", BOTTOM: "bottom", TOP: "top"}

# Numerical Recipes LCG; fixed so that identical seeds give identical meshes.
LCG_A = 1664525
LCG_C = 1013904223
LCG_M = 2**32


def lcg_uniform(seed: int, count: int) -> np.ndarray:
    """Return ``count`` uniforms in [0, 1) from the LCG started at ``seed``.

    ``state_{k+1} = (1664525 * state_k + 1013904223) mod 2**32`` and the k-th
    sample is ``state_{k+1} / 2**32``.
    """
    state = int(seed) % LCG_M
    out = np.empty(count)
    for k in range(count):
        state = (LCG_A * state + LCG_C) % LCG_M
        out[k] = state / LCG_M
    return out


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray  # (nv, 2)
    triangles: np.ndarray  # (nt, 3), counterclockwise
    edges: np.ndarray  # (ne, 2), sorted vertex pairs, unique
    boundary_edges: np.ndarray  # (nb,) indices into ``edges``
    boundary_marker: np.ndarray  # (nb,) LEFT/RIGHT/BOTTOM/TOP
    level: int  # cells per side
    perturbation: tuple[float, int] | None = None
    diagonal: str = "right"

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def diameters(self) -> np.ndarray:
        """Longest edge of every triangle."""
        p = self.vertices[self.triangles]
        lengths = np.stack(
            [np.linalg.norm(p[:, (i + 1) % 3] - p[:, i], axis=1) for i in range(3)],
            axis=1,
        )
        return lengths.max(axis=1)


@dataclass(frozen=True)
class FaceSet:
    """Interior and boundary faces of a mesh.

    Interior faces are oriented from ``elem_minus`` to ``elem_plus`` with
    ``elem_minus < elem_plus``; ``normal`` is the outward normal of
    ``elem_minus``. ``local_minus``/``local_plus`` hold the local vertex
    numbers of the face endpoints (same order as ``endpoints``) in each
    neighbour, which is what the face integrals need.
    """

    elem_minus: np.ndarray
    elem_plus: np.ndarray
    normal: np.ndarray
    length: np.ndarray
    endpoints: np.ndarray  # (nf, 2, 2)
    local_minus: np.ndarray  # (nf, 2)
    local_plus: np.ndarray  # (nf, 2)
    bnd_elem: np.ndarray
    bnd_normal: np.ndarray
    bnd_length: np.ndarray
    bnd_marker: np.ndarray
    bnd_endpoints: np.ndarray
    bnd_local: np.ndarray

    @property
    def n_interior(self) -> int:
        return len(self.elem_minus)

    @property
    def n_boundary(self) -> int:
        return len(self.bnd_elem)


def triangle_edges(triangles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sorted unique edges and, per triangle, the edge index opposite each vertex."""
    # local edge i joins local vertices (i+1)%3 and (i+2)%3, i.e. opposite vertex i
    all_edges = np.concatenate(
        [triangles[:, [1, 2]], triangles[:, [2, 0]], triangles[:, [0, 1]]]
    )
    all_edges.sort(axis=1)
    edges, inverse = np.unique(all_edges, axis=0, return_inverse=True)
    nt = len(triangles)
    tri_edges = inverse.ravel().reshape(3, nt).T
    return edges, tri_edges


DIAGONALS = ("right", "left", "alternate")


def build_structured(
    n: int, perturb: tuple[float, int] | None = None, diagonal: str = "right"
) -> Mesh:
    """Uniform ``n x n`` grid of squares, each cut into two triangles.

    ``diagonal="right"`` cuts every cell from lower-left to upper-right,
    ``"left"`` from upper-left to lower-right, ``"alternate"`` switches between
    the two in a checkerboard pattern (``right`` where ``i + j`` is even).

    ``perturb=(amplitude, seed)`` displaces every interior vertex by at most
    ``amplitude / n`` per coordinate using :func:`lcg_uniform`. Interior
    vertices are visited in increasing index order, x offset first.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs)  # row j holds y = xs[j]
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return i + j * (n + 1)

    I, J = np.meshgrid(np.arange(n), np.arange(n))
    I, J = I.ravel(), J.ravel()
    v00, v10, v11, v01 = vid(I, J), vid(I + 1, J), vid(I + 1, J + 1), vid(I, J + 1)
    if diagonal not in DIAGONALS:
        raise ValueError(f"diagonal must be one of {DIAGONALS}, got {diagonal!r}")
    if diagonal == "right":
        use_right = np.ones(n * n, dtype=bool)
    elif diagonal == "left":
        use_right = np.zeros(n * n, dtype=bool)
    else:
        use_right = (I + J) % 2 == 0
    first = np.where(use_right[:, None], np.column_stack([v00, v10, v11]), np.column_stack([v00, v10, v01]))
    second = np.where(use_right[:, None], np.column_stack([v00, v11, v01]), np.column_stack([v10, v11, v01]))
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = first
    triangles[1::2] = second

    if perturb is not None:
        amplitude, seed = perturb
        if not 0.0 <= amplitude < 0.3:
            raise ValueError(f"perturbation amplitude must lie in [0, 0.3), got {amplitude}")
        on_bnd = (
            np.isclose(vertices[:, 0], 0.0)
            | np.isclose(vertices[:, 0], 1.0)
            | np.isclose(vertices[:, 1], 0.0)
            | np.isclose(vertices[:, 1], 1.0)
        )
        interior = np.flatnonzero(~on_bnd)
        u = lcg_uniform(seed, 2 * len(interior)).reshape(-1, 2)
        vertices[interior] += amplitude / n * (2.0 * u - 1.0)

    edges, tri_edges = triangle_edges(triangles)
    counts = np.bincount(tri_edges.ravel(), minlength=len(edges))
    boundary_edges = np.flatnonzero(counts == 1)
    mid = vertices[edges[boundary_edges]].mean(axis=1)
    marker = np.full(len(boundary_edges), -1, dtype=np.int64)
    marker[np.isclose(mid[:, 1], 0.0)] = BOTTOM
    marker[np.isclose(mid[:, 1], 1.0)] = TOP
    marker[np.isclose(mid[:, 0], 0.0)] = LEFT
    marker[np.isclose(mid[:, 0], 1.0)] = RIGHT

    mesh = Mesh(
        vertices=vertices,
        triangles=triangles,
        edges=edges,
        boundary_edges=boundary_edges,
        boundary_marker=marker,
        level=n,
        perturbation=None if perturb is None else (float(perturb[0]), int(perturb[1])),
        diagonal=diagonal,
    )
    check_mesh(mesh)
    return mesh


def check_mesh(mesh: Mesh) -> None:
    """Raise ``ValueError`` if any mesh invariant is violated."""
    areas = mesh.signed_areas()
    if np.any(areas <= 0.0):
        bad = np.flatnonzero(areas <= 0.0)
        raise ValueError(f"{len(bad)} triangle(s) with nonpositive area, first {bad[0]}")
    v = mesh.vertices
    if v.min() < 0.0 or v.max() > 1.0:
        raise ValueError("vertices outside the unit square")
    if np.any(mesh.boundary_marker < 0):
        raise ValueError("boundary edge not on the unit square boundary")
    d = mesh.diameters()
    if d.max() / d.min() > 4.0:
        raise ValueError(f"mesh not quasi-uniform: diameter ratio {d.max() / d.min():.3g}")


def mesh_size(mesh: Mesh) -> float:
    """Largest triangle diameter (longest edge)."""
    return float(mesh.diameters().max())


def build_faces(mesh: Mesh) -> FaceSet:
    """Classify every edge as interior or boundary and attach normals and lengths."""
    tris = mesh.triangles
    _, tri_edges = triangle_edges(tris)
    ne = len(mesh.edges)
    flat_edge = tri_edges.ravel()  # triangle-major: (t, local edge)
    counts = np.bincount(flat_edge, minlength=ne)
    if np.any(counts > 2):
        raise ValueError("nonconforming mesh: edge shared by more than two triangles")

    order = np.argsort(flat_edge, kind="stable")
    sorted_edge = flat_edge[order]
    owner_tri = order // 3
    first = np.searchsorted(sorted_edge, np.arange(ne))

    interior = np.flatnonzero(counts == 2)
    boundary = np.flatnonzero(counts == 1)

    # stable sort keeps triangle order, so the first owner has the lower index
    tm = owner_tri[first[interior]]
    tp = owner_tri[first[interior] + 1]

    a = mesh.edges[interior, 0]
    b = mesh.edges[interior, 1]
    pa, pb = mesh.vertices[a], mesh.vertices[b]
    t = pb - pa
    length = np.linalg.norm(t, axis=1)
    normal = np.column_stack([t[:, 1], -t[:, 0]]) / length[:, None]
    centroid_m = mesh.vertices[tris[tm]].mean(axis=1)
    flip = np.einsum("ij,ij->i", normal, 0.5 * (pa + pb) - centroid_m) < 0.0
    normal[flip] *= -1.0

    local_minus = _local_indices(tris[tm], a, b)
    local_plus = _local_indices(tris[tp], a, b)

    bt = owner_tri[first[boundary]]
    ba = mesh.edges[boundary, 0]
    bb = mesh.edges[boundary, 1]
    qa, qb = mesh.vertices[ba], mesh.vertices[bb]
    bt_vec = qb - qa
    blen = np.linalg.norm(bt_vec, axis=1)
    bnormal = np.column_stack([bt_vec[:, 1], -bt_vec[:, 0]]) / blen[:, None]
    bcent = mesh.vertices[tris[bt]].mean(axis=1)
    bflip = np.einsum("ij,ij->i", bnormal, 0.5 * (qa + qb) - bcent) < 0.0
    bnormal[bflip] *= -1.0
    # mesh.boundary_edges is sorted, as is ``boundary``; both come from the same edge list
    if not np.array_equal(boundary, mesh.boundary_edges):
        raise ValueError("boundary edges of mesh and face set disagree")

    return FaceSet(
        elem_minus=tm,
        elem_plus=tp,
        normal=normal,
        length=length,
        endpoints=np.stack([pa, pb], axis=1),
        local_minus=local_minus,
        local_plus=local_plus,
        bnd_elem=bt,
        bnd_normal=bnormal,
        bnd_length=blen,
        bnd_marker=mesh.boundary_marker.copy(),
        bnd_endpoints=np.stack([qa, qb], axis=1),
        bnd_local=_local_indices(tris[bt], ba, bb),
    )


def _local_indices(tri_vertices: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    la = np.argmax(tri_vertices == a[:, None], axis=1)
    lb = np.argmax(tri_vertices == b[:, None], axis=1)
    return np.column_stack([la, lb])
