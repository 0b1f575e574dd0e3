import numpy as np
import pytest

from gsigma.catalog import balanced_torus, direct_sum
from gsigma.exceptions import SolverError
from gsigma.field import el_residual, stiefel_defect
from gsigma.goursat import analytic_boundary_data, goursat_solve, random_initial_data, rhs
from gsigma.grid import LightConeGrid
from gsigma.algebra import random_stiefel


def _torus_errors(sol, coupling, nodes=(17, 33, 65)):
    errs = []
    for n in nodes:
        g = LightConeGrid.square(n, 1.0)
        left, right = analytic_boundary_data(sol, g)
        gf = goursat_solve(left, right, g, coupling=coupling)
        ex = sol.sample(g).frames
        # compare gauge-invariant projectors
        p = gf.frames @ gf.frames.conj().transpose(0, 1, 3, 2)
        q = ex @ ex.conj().transpose(0, 1, 3, 2)
        errs.append(np.max(np.abs(p - q)))
    return np.array(errs)


def test_reproduces_analytic_torus_at_second_order():
    errs = _torus_errors(balanced_torus(2.0, -1.0, 1.5, 0.5), 1.0)
    assert errs[-1] < 1e-3
    assert np.all(np.log2(errs[:-1] / errs[1:]) > 1.8)


def test_reproduces_direct_sum():
    sol = direct_sum(balanced_torus(1, 0, 0, 1), balanced_torus(0, 1.5, 1, 0))
    errs = _torus_errors(sol, 1.0, (17, 33))
    assert errs[1] < errs[0] / 3.5


def test_literal_factor_two_does_not_reproduce_solution():
    errs = _torus_errors(balanced_torus(2.0, -1.0, 1.5, 0.5), 2.0)
    assert errs[-1] > 1e-2
    assert errs[-1] > 0.5 * errs[0]


def test_rhs_is_tangent_to_constraint(rng):
    # X^dagger F + F^dagger X + X_L^dagger X_R + X_R^dagger X_L = 0
    x = random_stiefel(4, 2, rng)
    xl = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    xr = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    xl -= x @ (x.conj().T @ xl + xl.conj().T @ x) / 2
    xr -= x @ (x.conj().T @ xr + xr.conj().T @ x) / 2
    f = rhs(x, xl, xr)
    c = x.conj().T @ f + f.conj().T @ x + xl.conj().T @ xr + xr.conj().T @ xl
    assert np.max(np.abs(c)) < 1e-13


def test_random_solve_is_deterministic_and_on_manifold():
    g = LightConeGrid.square(17, 1.0)
    a = goursat_solve(*random_initial_data(3, 1, 42), g)
    b = goursat_solve(*random_initial_data(3, 1, 42), g)
    np.testing.assert_array_equal(a.frames, b.frames)
    assert np.max(stiefel_defect(a.frames)) < 1e-13
    assert a.provenance == "solved"
    for key in ("max_retraction", "max_cell_iterations", "min_chart_singular_value"):
        assert key in a.meta


def test_random_solve_residual_decreases():
    left, right = random_initial_data(3, 2, 3, amplitude=0.2)
    res = []
    for n in (17, 33, 65):
        g = LightConeGrid.square(n, 1.0)
        gf = goursat_solve(left, right, g)
        res.append(np.max(el_residual(gf.jets())[2:-2, 2:-2]))
    assert res[2] < res[1] < res[0]


def test_initial_data_share_corner():
    left, right = random_initial_data(4, 2, 9, origin=(0.25, -0.5))
    np.testing.assert_allclose(left(0.25), right(-0.5), atol=1e-15)


def test_corner_mismatch():
    g = LightConeGrid.square(5)
    left, _ = random_initial_data(3, 1, 1)
    _, right = random_initial_data(3, 1, 2)
    with pytest.raises(SolverError, match="corner"):
        goursat_solve(left, right, g)


def test_bad_data_shape():
    g = LightConeGrid.square(5)
    with pytest.raises(SolverError):
        goursat_solve(np.zeros((4, 3, 1)), np.zeros((5, 3, 1)), g)


def test_coarse_step_fails_loudly():
    left, right = random_initial_data(3, 1, 0, amplitude=2.0, speed=8.0)
    g = LightConeGrid.square(5, 2.0)
    with pytest.raises(SolverError):
        goursat_solve(left, right, g)
