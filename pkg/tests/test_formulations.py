import numpy as np
import pytest
from conftest import make_space

from stabfem.analysis import l2_error
from stabfem.cases import INFLOW, OUTFLOW, polynomial_case, smooth_case, zero_case
from stabfem.formulations import (
    PRIMAL_DUAL,
    STANDARD,
    StabilizationConfig,
    check_compatible,
    check_galerkin_orthogonality,
    check_partial_coercivity,
    default_gamma,
    default_gamma_bc,
    solve_case,
    solve_data_assimilation,
    solve_primal_dual,
    solve_standard,
)
from stabfem.space import CONTINUOUS, DISCONTINUOUS, interpolate

CONFIGS = [("GLS", CONTINUOUS), ("CIP", CONTINUOUS), ("DG", DISCONTINUOUS)]


def test_defaults():
    assert default_gamma("CIP", 1) == 0.01
    assert default_gamma("CIP", 2) == 0.001
    assert default_gamma("DG", 1) == 0.5
    assert default_gamma_bc(PRIMAL_DUAL) == 0.5
    with pytest.raises(ValueError):
        default_gamma("SUPG", 1)
    cfg = StabilizationConfig.with_defaults("CIP", 2, STANDARD, gamma_bc=-1.0)
    assert (cfg.gamma, cfg.gamma_bc, cfg.formulation) == (0.001, -1.0, STANDARD)
    assert cfg.scaled(2.0).gamma == pytest.approx(0.002)


@pytest.mark.parametrize("kw", [{"method": "SUPG"}, {"formulation": "mixed"}, {"data_side": "left"}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        StabilizationConfig(**kw)


def test_check_compatible_names_the_problem():
    with pytest.raises(ValueError, match="GLS requires a continuous"):
        check_compatible(StabilizationConfig("GLS"), make_space(2, DISCONTINUOUS))
    with pytest.raises(ValueError, match="DG requires a discontinuous"):
        check_compatible(StabilizationConfig("DG", 0.5), make_space(2))


@pytest.mark.parametrize("method,continuity", CONFIGS)
@pytest.mark.parametrize("formulation", [STANDARD, PRIMAL_DUAL])
@pytest.mark.parametrize("k", [1, 2])
def test_zero_data_gives_zero(method, continuity, formulation, k):
    V = make_space(4, continuity, k)
    sol = solve_case(zero_case(1), V, StabilizationConfig.with_defaults(method, k, formulation))
    assert np.max(np.abs(sol.u)) <= 1e-10
    if sol.z is not None:
        assert np.max(np.abs(sol.z)) <= 1e-10


@pytest.mark.parametrize("method,continuity", CONFIGS)
@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("side", [INFLOW, OUTFLOW])
def test_galerkin_orthogonality(method, continuity, k, side):
    V = make_space(4, continuity, k, perturb=(0.2, 11))
    case = polynomial_case(k, data_side=side)
    sol = solve_primal_dual(case, V, StabilizationConfig.with_defaults(method, k, data_side=side))
    r1, r2 = check_galerkin_orthogonality(sol)
    assert r1 <= 1e-10 and r2 <= 1e-10
    assert check_partial_coercivity(sol) <= 1e-8
    assert np.max(np.abs(sol.u - interpolate(V, case.u))) <= 1e-9


def test_galerkin_orthogonality_preconditions():
    V = make_space(3)
    sol = solve_standard(polynomial_case(1), V, StabilizationConfig.with_defaults("CIP", 1, STANDARD))
    with pytest.raises(ValueError, match="primal-dual"):
        check_galerkin_orthogonality(sol)
    with pytest.raises(ValueError):
        check_partial_coercivity(sol)
    sol = solve_primal_dual(polynomial_case(2), V, StabilizationConfig.with_defaults("CIP", 1))
    with pytest.raises(ValueError, match="inside the discrete space"):
        check_galerkin_orthogonality(sol)


def test_partial_coercivity_on_smooth_problem():
    V = make_space(8, CONTINUOUS, 1)
    sol = solve_primal_dual(smooth_case(1), V, StabilizationConfig.with_defaults("CIP", 1))
    assert check_partial_coercivity(sol) <= 1e-8
    assert sol.residual <= 1e-12


def test_formulation_forced_by_solver():
    V = make_space(3)
    cfg = StabilizationConfig.with_defaults("CIP", 1, PRIMAL_DUAL)
    assert solve_standard(polynomial_case(1), V, cfg).config.formulation == STANDARD
    assert solve_primal_dual(polynomial_case(1), V, cfg).z is not None


def test_data_assimilation_switches_to_outflow():
    V = make_space(4)
    sol = solve_data_assimilation(smooth_case(1), V, StabilizationConfig.with_defaults("CIP", 1))
    assert sol.config.data_side == OUTFLOW
    assert sol.case.data_side == OUTFLOW


def test_incompatible_solve_raises():
    with pytest.raises(ValueError):
        solve_case(smooth_case(1), make_space(2, DISCONTINUOUS), StabilizationConfig.with_defaults("CIP", 1))


# Order-of-magnitude agreement with reference errors at n = 16 (factor 3 accounts for different meshes).
@pytest.mark.parametrize(
    "formulation,side,gamma,gamma_bc,reference",
    [
        (STANDARD, INFLOW, None, None, 7.2e-3),
        (PRIMAL_DUAL, INFLOW, None, None, 6.5e-3),
        (PRIMAL_DUAL, OUTFLOW, None, None, 7.1e-3),
        (STANDARD, OUTFLOW, -0.01, -1.0, 6.7e-3),
    ],
)
def test_reference_magnitude_n16(formulation, side, gamma, gamma_bc, reference):
    V = make_space(16)
    cfg = StabilizationConfig.with_defaults("CIP", 1, formulation, side, gamma, gamma_bc)
    solver = solve_data_assimilation if side == OUTFLOW else solve_case
    err = l2_error(solver(smooth_case(1), V, cfg))
    assert reference / 3 <= err <= 3 * reference
