import numpy as np
import pytest

from gsigma.catalog import balanced_torus, chiral_wave, direct_sum, exponential_curve, flat_plane
from gsigma.algebra import inner_product, norm, random_algebra, random_stiefel
from gsigma.exceptions import DegenerateMetricError
from gsigma.field import tangent_vectors
from gsigma.geometry import (MetricData, analyze_geometry, first_fundamental_form,
                             fundamental_form_II_and_H, gaussian_curvature, induced_metric,
                             mixed_derivatives_Z, regularity_test, schwarz_chain,
                             second_derivatives_Z)
from gsigma.grid import LightConeGrid, interior_mask

from jets import TwoFlowField


def torus_plus_wave(seed=0):
    """Regular analytic surface with K = 0 and H != 0."""
    rng = np.random.default_rng(seed)
    wave = chiral_wave(*exponential_curve(random_stiefel(3, 1, rng), random_algebra(3, rng)))
    return direct_sum(balanced_torus(0.0, 0.0, 2.0, 0.0), wave)


def test_flat_plane_geometry():
    g = LightConeGrid.square(9, 1.0, (-0.5, -0.5))
    geo = analyze_geometry(flat_plane().sample(g))
    np.testing.assert_allclose(geo.metric.matrix, np.broadcast_to(np.eye(2), (9, 9, 2, 2)), atol=1e-14)
    inner = interior_mask(g.shape, 1)
    assert np.max(np.abs(geo.K[inner])) < 1e-12
    assert np.all(np.isnan(geo.K[~inner]))
    s = geo.second
    for part in (s.IILL, s.IILR, s.IIRR, s.H):
        assert np.max(norm(part)) < 1e-12


def test_second_derivative_expansion_matches_fd_of_tangents():
    f = TwoFlowField(4, 2, seed=6)
    xiL, xiR, h = 0.2, -0.3, 1e-4
    zll, zlr, zrr = second_derivatives_Z(f.jet(xiL, xiR))

    def z(a, b):
        return tangent_vectors(f.jet(a, b))

    c = np.array([1, -8, 8, -1]) / (12 * h)
    off = np.array([-2, -1, 1, 2]) * h
    dl_zl = sum(w * z(xiL + o, xiR)[0] for w, o in zip(c, off))
    dr_zl = sum(w * z(xiL, xiR + o)[0] for w, o in zip(c, off))
    dl_zr = sum(w * z(xiL + o, xiR)[1] for w, o in zip(c, off))
    dr_zr = sum(w * z(xiL, xiR + o)[1] for w, o in zip(c, off))
    np.testing.assert_allclose(zll, dl_zl, atol=1e-9)
    np.testing.assert_allclose(zrr, dr_zr, atol=1e-9)
    # the symmetric part of the mixed derivative is the commutator for any field
    np.testing.assert_allclose(dr_zl + dl_zr, 2 * zlr, atol=1e-8)
    a, b = mixed_derivatives_Z(f.jet(xiL, xiR))
    np.testing.assert_allclose(a, dr_zl, atol=1e-8)
    np.testing.assert_allclose(b, dl_zr, atol=1e-8)


def test_mixed_derivative_is_commutator_on_solutions():
    sol = torus_plus_wave()
    xiL, xiR, h = 0.3, 0.1, 1e-4
    _, zlr, _ = second_derivatives_Z(sol.jet(xiL, xiR))
    dr_zl = (tangent_vectors(sol.jet(xiL, xiR + h))[0]
             - tangent_vectors(sol.jet(xiL, xiR - h))[0]) / (2 * h)
    dl_zr = (tangent_vectors(sol.jet(xiL + h, xiR))[1]
             - tangent_vectors(sol.jet(xiL - h, xiR))[1]) / (2 * h)
    np.testing.assert_allclose(dr_zl, zlr, atol=1e-7)
    np.testing.assert_allclose(dl_zr, zlr, atol=1e-7)


def test_orthogonality_on_solutions_only():
    L, R = np.meshgrid(np.linspace(-1, 1, 5), np.linspace(-1, 1, 5), indexing="ij")
    jet = torus_plus_wave().jet(L, R)
    zl, zr = tangent_vectors(jet)
    for dz in mixed_derivatives_Z(jet):
        assert np.max(np.abs(inner_product(dz, zl))) < 1e-12
        assert np.max(np.abs(inner_product(dz, zr))) < 1e-12
    jet = TwoFlowField(3, 1, seed=1).jet(L, R)
    zl, _ = tangent_vectors(jet)
    dz, _ = mixed_derivatives_Z(jet)
    assert np.max(np.abs(inner_product(dz, zl))) > 1e-3


def test_regular_surface_with_mean_curvature():
    g = LightConeGrid.square(9, 1.0)
    geo = analyze_geometry(torus_plus_wave().sample(g))
    assert np.all(geo.regular)
    assert np.min(geo.Hnorm) > 1e-2
    assert np.nanmax(np.abs(geo.K_gauss)) < 1e-10


def test_k_formula_chebyshev_oracle():
    # J_L = J_R = 1, G_LR = cos w: classical result K = -w_LR / sin w
    K = []
    for n in (33, 65):
        g = LightConeGrid.square(n, 1.0)
        L, R = g.mesh()
        w = 1.2 + 0.3 * np.sin(2 * L) * np.cos(3 * R)
        w_lr = -0.3 * 6 * np.cos(2 * L) * np.sin(3 * R)
        md = MetricData(np.ones_like(L), np.cos(w), np.ones_like(L))
        err = np.nanmax(np.abs(gaussian_curvature(md, g) + w_lr / np.sin(w)))
        K.append(err)
    assert K[1] < K[0] / 3.5 and K[1] < 1e-2


def test_first_form_compact_matches_metric():
    jet = TwoFlowField(4, 2, seed=2).jet(0.1, 0.5)
    v = np.array([0.7, -1.3])
    assert first_fundamental_form(jet, v) == pytest.approx(induced_metric(jet).first_form(v), rel=1e-12)


def test_schwarz_chain_ordering():
    L, R = np.meshgrid(np.linspace(-1, 1, 4), np.linspace(-1, 1, 4), indexing="ij")
    a, b, c = schwarz_chain(TwoFlowField(3, 2, seed=3).jet(L, R))
    assert np.all(a >= b - 1e-13) and np.all(b >= c - 1e-13)


def test_regularity_classification():
    rep = regularity_test(balanced_torus(1, 0, 1, 0).jet(0.0, 0.0))
    assert not rep and "degenerate" in rep.reason
    rep = regularity_test(flat_plane().jet(0.0, 0.0))
    assert rep and "regular" in rep.reason
    assert bool(rep.independent)


def test_degenerate_point_strict_and_lenient():
    jet = balanced_torus(1, 0, 1, 0).jet(np.zeros(3), np.zeros(3))
    with pytest.raises(DegenerateMetricError):
        fundamental_form_II_and_H(jet)
    s = fundamental_form_II_and_H(jet, strict=False)
    assert np.all(np.isnan(s.Hnorm))


def test_geometry_rows():
    g = LightConeGrid.square(5)
    geo = analyze_geometry(flat_plane().sample(g))
    rows = geo.rows()
    assert rows.shape == (25, len(geo.CSV_HEADER))
    assert geo.CSV_HEADER[:3] == ("xi_L", "xi_R", "J_L")
