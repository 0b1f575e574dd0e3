import numpy as np
import pytest
from hypothesis import given, strategies as st

from gsigma.algebra import inner_product, random_special_unitary, random_stiefel
from gsigma.catalog import balanced_torus, torus
from gsigma.exceptions import ConstraintError, DimensionError, MissingDerivativeError
from gsigma.field import (FieldJet, StiefelFrame, check_stiefel, conservation_residual, covariant_derivative,
                          currents, el_residual, el_residual_xform, gauge_transform,
                          global_transform, lagrangian_density, local_gauge_jet, projector,
                          projector_derivatives, retract, tangent_vectors, transform_jet)

from jets import TwoFlowField, central, expm_ah

seeds = st.integers(min_value=0, max_value=2**32 - 1)
shapes = st.sampled_from([(2, 1), (3, 1), (3, 2), (4, 2), (5, 3)])


@given(shapes, seeds)
def test_projector_contract(shape, seed):
    x = random_stiefel(*shape, np.random.default_rng(seed))
    p = projector(x)
    assert np.linalg.norm(p @ p - p) <= 1e-12
    assert np.linalg.norm(p.conj().T - p) <= 1e-12
    assert np.linalg.norm(p @ x) <= 1e-12
    assert np.trace(p).real == pytest.approx(shape[0] - shape[1])


def test_check_stiefel_errors():
    with pytest.raises(DimensionError):
        check_stiefel(np.eye(2))
    with pytest.raises(DimensionError):
        check_stiefel(np.ones(3))
    with pytest.raises(ConstraintError):
        check_stiefel(np.array([[1.0], [1.0]]))


def test_stiefel_frame_type(rng):
    f = StiefelFrame.random(5, 2, rng)
    assert (f.n, f.m) == (5, 2)
    np.testing.assert_array_equal(projector(f), projector(f.mat))
    np.testing.assert_allclose(projector(StiefelFrame(np.array([[1.0], [0.0]]))), np.diag([0, 1]))
    with pytest.raises(ConstraintError):
        StiefelFrame(np.array([[1.0], [1.0]]))
    with pytest.raises(DimensionError):
        StiefelFrame(np.eye(3))


def test_retract_restores_constraint(rng):
    x = random_stiefel(4, 2, rng) + 1e-3 * rng.standard_normal((4, 2))
    y = retract(x)
    np.testing.assert_allclose(y.conj().T @ y, np.eye(2), atol=1e-14)


def test_projector_derivatives_match_finite_differences():
    f = TwoFlowField(4, 2, seed=3)
    xiL, xiR = 0.3, -0.2
    dp = projector_derivatives(f.jet(xiL, xiR))

    def proj(a, b):
        return projector(f.x(a, b))

    dl, dr, dlr = central(proj, xiL, xiR)
    np.testing.assert_allclose(dp["L"], dl, atol=1e-9)
    np.testing.assert_allclose(dp["R"], dr, atol=1e-9)
    np.testing.assert_allclose(dp["LR"], dlr, atol=1e-7)


def test_jet_constraint_defects_vanish_on_exact_jet():
    jet = TwoFlowField(3, 1, seed=8).jet(0.1, 0.4)
    jet.check(tol=1e-12)


def test_missing_second_derivative():
    j = balanced_torus(1, 0, 1, 0).jet(0.0, 0.0)
    with pytest.raises(MissingDerivativeError):
        el_residual(FieldJet(j.x, j.dL, j.dR))


def test_jet_shape_mismatch():
    with pytest.raises(DimensionError):
        FieldJet(np.zeros((3, 1)), np.zeros((3, 1)), np.zeros((2, 1)))


def test_conservation_form_is_twice_el():
    # holds identically, solution or not
    f = TwoFlowField(4, 2, seed=11)
    L, R = np.meshgrid(np.linspace(-1, 1, 5), np.linspace(-1, 1, 5), indexing="ij")
    jet = f.jet(L, R)
    np.testing.assert_allclose(conservation_residual(jet), 2 * el_residual(jet), rtol=1e-12)
    assert np.min(el_residual(jet)) > 1e-3


def test_unbalanced_torus_residual_against_fd_oracle():
    sol = torus((1.0, 0.0), (1.0, 0.0), (0.8**0.5, 0.2**0.5))
    xiL, xiR = 0.2, 0.5

    def proj(a, b):
        return projector(sol.jet(np.asarray(a), np.asarray(b)).x)

    _, _, dlr = central(proj, xiL, xiR)
    p = proj(xiL, xiR)
    oracle = np.linalg.norm(dlr @ p - p @ dlr)
    value = float(el_residual(sol.jet(xiL, xiR)))
    assert value == pytest.approx(oracle, rel=1e-6)
    assert value >= 1e-3


def test_currents_closed_form_unbalanced_torus():
    # J_L = c1^2 c2^2 (a1 - a2)^2, the variance of a under weights c^2
    sol = torus((3.0, 0.5), (-1.0, 2.0), (0.8**0.5, 0.2**0.5))
    jl, jr = currents(sol.jet(0.3, 0.7))
    assert jl == pytest.approx(0.16 * 2.5**2, abs=1e-12)
    assert jr == pytest.approx(0.16 * 3.0**2, abs=1e-12)


def test_tangent_identities():
    jet = TwoFlowField(4, 2, seed=5).jet(0.2, 0.1)
    zl, zr = tangent_vectors(jet)
    jl, jr = currents(jet)
    assert inner_product(zl, zl) == pytest.approx(jl, rel=1e-12)
    assert inner_product(zr, zr) == pytest.approx(jr, rel=1e-12)
    p = projector(jet.x)
    cross = -np.trace(jet.dL @ jet.dR.conj().T @ p).real
    assert inner_product(zl, zr) == pytest.approx(cross, rel=1e-12, abs=1e-14)
    assert lagrangian_density(jet) == pytest.approx(-4 * cross, rel=1e-12)


def test_covariant_derivative_is_orthogonal_to_x():
    jet = TwoFlowField(3, 2, seed=2).jet(0.4, 0.3)
    for d in ("L", "R"):
        assert np.linalg.norm(jet.x.conj().T @ covariant_derivative(jet, d)) < 1e-13
    with pytest.raises(ValueError):
        covariant_derivative(jet, "Q")


def test_xform_coupling_on_torus():
    # X = (e^{i(xi_L + xi_R)}, 1)/sqrt 2: residual is |c - 1| / 2 by hand
    jet = balanced_torus(1, 0, 1, 0).jet(0.3, -0.4)
    assert el_residual_xform(jet, 1.0) == pytest.approx(0.0, abs=1e-15)
    assert el_residual_xform(jet, 2.0) == pytest.approx(0.5, abs=1e-14)


@given(seeds)
def test_global_and_gauge_leave_projector_invariant(seed):
    rng = np.random.default_rng(seed)
    x = random_stiefel(4, 2, rng)
    g = random_special_unitary(4, rng)
    h = random_special_unitary(2, rng)
    p = projector(x)
    np.testing.assert_allclose(projector(gauge_transform(x, h)), p, atol=1e-13)
    np.testing.assert_allclose(projector(global_transform(g, x)), g @ p @ g.conj().T, atol=1e-13)


def test_transform_errors(rng):
    x = random_stiefel(3, 1, rng)
    with pytest.raises(DimensionError):
        global_transform(random_special_unitary(2, rng), x)
    with pytest.raises(DimensionError):
        gauge_transform(x, random_special_unitary(2, rng))


def test_global_transform_of_jet_preserves_residuals():
    f = TwoFlowField(3, 1, seed=4)
    jet = f.jet(0.1, 0.2)
    g = random_special_unitary(3, np.random.default_rng(1))
    t = transform_jet(jet, g=g)
    assert el_residual(t) == pytest.approx(el_residual(jet), rel=1e-12)
    assert np.allclose(currents(t), currents(jet), rtol=1e-12)


def test_local_gauge_covariance_of_xform():
    # position-dependent U(1) phase on an N=2 solution; c=1 stays zero, c=2 changes
    sol = balanced_torus(2, 0, 0, 1)
    xiL, xiR = 0.3, 0.2
    jet = sol.jet(xiL, xiR)
    w = 0.7 * xiL - 1.1 * xiR
    h = np.array([[np.exp(1j * w)]])
    hl, hr = 0.7j * h, -1.1j * h
    t = local_gauge_jet(jet, h, hl, hr, (0.7j) ** 2 * h, 0.7j * -1.1j * h, (-1.1j) ** 2 * h)
    assert el_residual(t) == pytest.approx(0.0, abs=1e-14)
    assert el_residual_xform(t, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert el_residual_xform(jet, 2.0) != pytest.approx(
        el_residual_xform(t, 2.0), abs=1e-6)


def test_expm_helper_is_unitary():
    k = 1j * np.diag([1.0, -1.0])
    np.testing.assert_allclose(expm_ah(k, 0.5), np.diag(np.exp([0.5j, -0.5j])), atol=1e-15)
