import numpy as np
import pytest
from conftest import make_space

from stabfem.space import CONTINUOUS, DISCONTINUOUS, interpolate
from stabfem.vtk import write_vtk


def parse(path):
    lines = path.read_text().splitlines()
    assert lines[0] == "# vtk DataFile Version 3.0"
    assert lines[2] == "ASCII" and lines[3] == "DATASET UNSTRUCTURED_GRID"
    return lines


@pytest.mark.parametrize("continuity,k,ctype", [(CONTINUOUS, 1, "5"), (CONTINUOUS, 2, "22"), (DISCONTINUOUS, 1, "5")])
def test_vtk_layout(tmp_path, continuity, k, ctype):
    V = make_space(3, continuity, k)
    u = interpolate(V, lambda x, y: x + 2 * y)
    path = write_vtk(tmp_path / "f.vtk", V, {"u_h": u, "z_h": 0 * u})
    lines = parse(path)
    i = lines.index(f"POINTS {V.n_dofs} double")
    pts = np.array([list(map(float, s.split())) for s in lines[i + 1 : i + 1 + V.n_dofs]])
    assert np.allclose(pts[:, :2], V.dof_coords)
    nc = V.cell_dofs.shape[0]
    j = lines.index(f"CELLS {nc} {nc * (3 * k + 1)}")
    first = list(map(int, lines[j + 1].split()))
    assert first == [3 * k, *V.cell_dofs[0]]
    t = lines.index(f"CELL_TYPES {nc}")
    assert set(lines[t + 1 : t + 1 + nc]) == {ctype}
    s = lines.index("SCALARS u_h double 1")
    vals = np.array(list(map(float, lines[s + 2 : s + 2 + V.n_dofs])))
    assert np.array_equal(vals, u)  # 17 significant digits round-trip exactly
    assert "SCALARS z_h double 1" in lines


def test_vtk_rejects_wrong_length(tmp_path):
    V = make_space(2)
    with pytest.raises(ValueError):
        write_vtk(tmp_path / "f.vtk", V, {"u_h": np.zeros(3)})
