"""Legacy ASCII VTK output of nodal fields (``UNSTRUCTURED_GRID``)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .space import FiniteElementSpace

# VTK_TRIANGLE and VTK_QUADRATIC_TRIANGLE; the local P2 ordering already matches the latter.
CELL_TYPE = {1: 5, 2: 22}


def write_vtk(path, space: FiniteElementSpace, fields: dict[str, np.ndarray], title: str = "stabfem") -> Path:
    """Write one point per dof, so discontinuous fields are stored without averaging."""
    path = Path(path)
    nloc = space.n_local
    lines = [
        "# vtk DataFile Version 3.0",
        title.replace("\n", " ")[:255],
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {space.n_dofs} double",
    ]
    lines += [f"{x:.16e} {y:.16e} 0" for x, y in space.dof_coords]
    n_cells = space.cell_dofs.shape[0]
    lines.append(f"CELLS {n_cells} {n_cells * (nloc + 1)}")
    lines += [f"{nloc} " + " ".join(map(str, row)) for row in space.cell_dofs]
    lines.append(f"CELL_TYPES {n_cells}")
    lines += [str(CELL_TYPE[space.degree])] * n_cells
    if fields:
        lines.append(f"POINT_DATA {space.n_dofs}")
    for name, values in fields.items():
        values = np.asarray(values, dtype=float)
        if values.shape != (space.n_dofs,):
            raise ValueError(f"field {name!r} has shape {values.shape}, expected ({space.n_dofs},)")
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [f"{v:.16e}" for v in values]
    path.write_text("\n".join(lines) + "\n")
    return path
