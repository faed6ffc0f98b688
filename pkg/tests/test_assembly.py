import numpy as np
import pytest
import scipy.sparse as sp
from conftest import ALL_SPACES, BETA1, BETA_CONST, make_space
from hypothesis import given, settings
from hypothesis import strategies as st

from stabfem import assembly
from stabfem.cases import INFLOW, OUTFLOW, constant_velocity, polynomial_case
from stabfem.formulations import StabilizationConfig, primal_stabilization
from stabfem.mesh import mesh_size
from stabfem.space import CONTINUOUS, DISCONTINUOUS, interpolate


def const(c):
    return lambda x, y: np.full(np.shape(x), float(c))


def test_scatter_sums_duplicates():
    rows = np.array([[0, 1], [1, 2]])
    local = np.ones((2, 2, 2))
    M = assembly.scatter(rows, rows, local, (3, 3)).toarray()
    assert np.array_equal(M, [[1, 1, 0], [1, 2, 1], [0, 1, 1]])
    v = assembly.scatter_vector(rows, np.ones((2, 2)), 3)
    assert np.array_equal(v, [1, 2, 1])


@pytest.mark.parametrize("continuity,k", ALL_SPACES)
def test_advection_on_constants_gives_reaction_mass(continuity, k):
    V = make_space(3, continuity, k, perturb=(0.2, 4))
    sigma = lambda x, y: 1 + x * y  # noqa: E731
    A = assembly.assemble_advection(V, BETA1, sigma)
    one = interpolate(V, const(1.0))
    assert np.allclose(A @ one, assembly.load_vector(V, sigma), atol=1e-13)


@pytest.mark.parametrize("continuity,k", ALL_SPACES)
def test_advection_symmetric_part_is_boundary_flux(continuity, k):
    """Divergence free beta and sigma = 0: A + A^T is the signed boundary flux matrix."""
    V = make_space(3, continuity, k, perturb=(0.1, 8))
    A = assembly.assemble_advection(V, BETA_CONST, const(0.0))
    out = assembly.assemble_boundary_penalty(V, BETA_CONST, 1.0, OUTFLOW)
    inn = assembly.assemble_boundary_penalty(V, BETA_CONST, 1.0, INFLOW)
    assert abs((A + A.T) - (out - inn)).max() < 1e-13


def test_boundary_penalty_total_flux():
    V = make_space(4)
    one = np.ones(V.n_dofs)
    # beta = (1, 2): |beta.n| integrates to 1 + 1 + 2 + 2 over the four sides
    for side, total in [(assembly.BOTH, 6.0), (INFLOW, 3.0), (OUTFLOW, 3.0)]:
        B = assembly.assemble_boundary_penalty(V, BETA_CONST, 1.0, side)
        assert one @ B @ one == pytest.approx(total, rel=1e-14)
    with pytest.raises(ValueError):
        assembly.assemble_boundary_penalty(V, BETA_CONST, 1.0, "diagonal")


def test_cip_hand_computed_single_face():
    # one cell, one interior face (the diagonal); hat at (1, 0) has gradient (1, -1) on one side, 0 on the other
    V = make_space(1)
    gamma = 0.37
    C = assembly.assemble_cip(V, constant_velocity(1.0, 0.0), gamma)
    hat = np.zeros(V.n_dofs)
    hat[1] = 1.0
    # gamma * h_F^2 |beta.n| * |[grad]|^2 * |F| = gamma * 2 * (1/sqrt2) * 2 * sqrt2
    assert hat @ C @ hat == pytest.approx(4 * gamma, rel=1e-14)
    # linear functions have no gradient jump
    lin = interpolate(V, lambda x, y: 3 * x - y)
    assert abs(lin @ C @ lin) < 1e-14


def test_dg_jump_hand_computed_single_face():
    V = make_space(1, DISCONTINUOUS, 1)
    gamma = 0.5
    S = assembly.assemble_dg_jump(V, constant_velocity(1.0, 0.0), gamma)
    u = np.zeros(V.n_dofs)
    u[V.cell_dofs[0]] = 1.0
    # jump 1 along the diagonal, |beta.n| = 1/sqrt2, length sqrt2
    assert u @ S @ u == pytest.approx(gamma, rel=1e-14)


@pytest.mark.parametrize("variant,integral", [("primal", 7 / 3), ("adjoint", 1 / 3)])
def test_gls_closed_form(variant, integral):
    # beta = (1, 2), sigma = 1, u = x: L u = 1 + x, L* u = -1 + x
    V = make_space(4, CONTINUOUS, 1)
    gamma = 0.2
    S = assembly.assemble_gls(V, BETA_CONST, const(1.0), gamma, variant)
    u = interpolate(V, lambda x, y: x)
    h = mesh_size(V.mesh)
    assert u @ S @ u == pytest.approx(gamma * h / np.sqrt(5) * integral, rel=1e-13)


def test_method_space_mismatch_raises():
    cg, dg = make_space(2), make_space(2, DISCONTINUOUS)
    with pytest.raises(ValueError, match="continuous"):
        assembly.assemble_cip(dg, BETA1, 0.01)
    with pytest.raises(ValueError, match="continuous"):
        assembly.assemble_gls(dg, BETA1, const(0.0), 0.1)
    with pytest.raises(ValueError, match="discontinuous"):
        assembly.assemble_dg_jump(cg, BETA1, 0.5)
    with pytest.raises(ValueError, match="variant"):
        assembly.assemble_gls(cg, BETA1, const(0.0), 0.1, "sideways")


def test_load_vector_integrates():
    for continuity, k in ALL_SPACES:
        V = make_space(3, continuity, k, perturb=(0.2, 3))
        F = assembly.load_vector(V, lambda x, y: x * y)
        assert F.sum() == pytest.approx(0.25, rel=1e-13)


@pytest.mark.parametrize("method,continuity,k", [("GLS", CONTINUOUS, 1), ("CIP", CONTINUOUS, 2), ("DG", DISCONTINUOUS, 1), ("DG", DISCONTINUOUS, 2)])
@pytest.mark.parametrize("side", [INFLOW, OUTFLOW])
def test_data_terms_match_operator_on_representable_solution(method, continuity, k, side):
    V = make_space(3, continuity, k, perturb=(0.15, 6))
    case = polynomial_case(k, data_side=side)
    stab = StabilizationConfig.with_defaults(method, k, data_side=side)
    S_p = primal_stabilization(V, case, stab)
    uI = interpolate(V, case.u)
    assert np.allclose(assembly.primal_data_vector(V, case, stab), S_p @ uI, atol=1e-12)
    assert assembly.data_energy(V, case, stab) == pytest.approx(uI @ S_p @ uI, rel=1e-12)


def test_assemble_rhs_targets():
    V = make_space(3)
    case = polynomial_case(1)
    std = StabilizationConfig.with_defaults("CIP", 1, "standard")
    pd = StabilizationConfig.with_defaults("CIP", 1, "primal_dual")
    F = assembly.load_vector(V, case.f)
    assert np.allclose(assembly.assemble_rhs(V, case, pd, "primal_eq"), F)
    assert np.allclose(assembly.assemble_rhs(V, case, std, "primal_eq"), F + assembly.primal_data_vector(V, case, std))
    assert np.allclose(assembly.assemble_rhs(V, case, pd, "dual_eq"), -assembly.primal_data_vector(V, case, pd))
    with pytest.raises(ValueError):
        assembly.assemble_rhs(V, case, pd, "other")


def stabilization_matrices(V):
    mats = [
        assembly.assemble_boundary_penalty(V, BETA1, 0.5, INFLOW),
        assembly.assemble_boundary_penalty(V, BETA1, 0.5, assembly.BOTH),
    ]
    if V.continuous:
        sigma = BETA1.divergence
        mats += [
            assembly.assemble_cip(V, BETA1, 0.01),
            assembly.assemble_gls(V, BETA1, sigma, 0.1, "primal"),
            assembly.assemble_gls(V, BETA1, sigma, 0.1, "adjoint"),
        ]
    else:
        mats.append(assembly.assemble_dg_jump(V, BETA1, 0.5))
    return mats


@settings(max_examples=20, deadline=None)
@given(
    idx=st.integers(0, 3),
    n=st.integers(1, 4),
    seed=st.integers(0, 10_000),
)
def test_stabilization_symmetric_psd_property(idx, n, seed):
    continuity, k = ALL_SPACES[idx]
    V = make_space(n, continuity, k, perturb=(0.2, seed))
    x = np.random.default_rng(seed).standard_normal(V.n_dofs)
    for S in stabilization_matrices(V):
        assert sp.issparse(S)
        scale = max(abs(S).max(), 1.0)
        assert abs(S - S.T).max() <= 1e-13 * scale
        assert x @ S @ x >= -1e-12 * scale * (x @ x)
