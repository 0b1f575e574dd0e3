import numpy as np
import pytest

from gsigma.catalog import reparametrize
from gsigma.field import FieldJet, el_residual, local_gauge_jet

from symmetry import ALPHA, BETA, catalog_solutions, invariants, symmetry_report, worst
from jets import TwoFlowField, expm_ah

SOLUTIONS = catalog_solutions()


@pytest.mark.parametrize("name", sorted(SOLUTIONS))
def test_transforms_preserve_solutions_and_invariants(name):
    report = symmetry_report(SOLUTIONS[name])
    assert set(report) == {"gauge", "global", "conformal", "parity"}
    el, inv = worst(report)
    assert el <= 1e-9
    assert inv <= 1e-9


def test_mean_curvature_is_compared_on_regular_surfaces():
    t = np.linspace(-1, 1, 5)
    L, R = np.meshgrid(t, t, indexing="ij")
    for name in ("torus_plus_wave", "flat_plane"):
        h = invariants(SOLUTIONS[name].jet(L, R))["|H|"]
        assert np.all(np.isfinite(h))
    assert np.max(invariants(SOLUTIONS["torus_plus_wave"].jet(L, R))["|H|"]) > 0.1


def test_conformal_invariants_need_chain_rule_factors():
    sol = SOLUTIONS["torus_plus_wave"]
    t = np.linspace(-1, 1, 9)
    L, R = np.meshgrid(t, t, indexing="ij")
    new = invariants(reparametrize(sol, ALPHA, BETA).jet(L, R))
    ref = invariants(sol.jet(ALPHA[0](L), BETA[0](R)))
    assert np.max(np.abs(new["J_R"] - ref["J_R"])) > 0.1
    np.testing.assert_allclose(new["|H|"], ref["|H|"], atol=1e-12)


def test_dropping_the_second_derivative_term_breaks_conformal_jet():
    sol = SOLUTIONS["torus_plus_wave"]
    t = np.linspace(-1, 1, 9)
    L, R = np.meshgrid(t, t, indexing="ij")
    j = sol.jet(ALPHA[0](L), BETA[0](R))
    a = ALPHA[1](L)[..., None, None]
    b = BETA[1](R)[..., None, None]
    bad = FieldJet(j.x, a * j.dL, b * j.dR, a**2 * j.dLL, a * b * j.dLR, b**2 * j.dRR)
    assert np.max(el_residual(bad)) < 1e-9  # mixed derivative is unaffected
    good = reparametrize(sol, ALPHA, BETA).jet(L, R)
    assert np.max(np.abs(good.dLL - bad.dLL)) > 1e-2


def test_local_gauge_leaves_residual_of_non_solution_unchanged():
    f = TwoFlowField(4, 2, seed=3)
    k = np.array([[0.4j, 0.3], [-0.3, -0.4j]])
    t = np.linspace(-1, 1, 5)
    L, R = np.meshgrid(t, t, indexing="ij")
    h = expm_ah(k, L * R)
    ex = (..., None, None)
    jet = f.jet(L, R)
    new = local_gauge_jet(jet, h, R[ex] * (k @ h), L[ex] * (k @ h), R[ex] ** 2 * (k @ k @ h),
                          k @ h + (L * R)[ex] * (k @ k @ h), L[ex] ** 2 * (k @ k @ h))
    assert np.min(el_residual(jet)) > 1e-2
    np.testing.assert_allclose(el_residual(new), el_residual(jet), atol=1e-12)
    for q, v in invariants(new).items():
        np.testing.assert_allclose(v, invariants(jet)[q], atol=1e-10, err_msg=q)
