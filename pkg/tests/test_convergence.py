import numpy as np
import pytest
from hypothesis import given, strategies as st

from gsigma.convergence import ConvergenceTable, coarse_view, study
from gsigma.grid import LightConeGrid


@given(st.floats(0.5, 4.0), st.floats(0.1, 10.0))
def test_power_law_order_is_recovered(p, c):
    h = (0.1, 0.05, 0.025)
    t = ConvergenceTable("x", h, tuple(c * v**p for v in h))
    assert t.order == pytest.approx(p, rel=1e-9)
    assert all(o == pytest.approx(p, rel=1e-9) for o in t.pairwise)
    assert t.decreasing()


def test_table_formatting_and_dict():
    t = ConvergenceTable("err", (0.1, 0.05), (4e-2, 1e-2))
    d = t.to_dict()
    assert d["order"] == pytest.approx(2.0)
    assert "fitted order 2.000" in t.format()


def test_coarse_view_checks_nesting():
    f = np.arange(9 * 9).reshape(9, 9)
    np.testing.assert_array_equal(coarse_view(f, (5, 5)), f[::2, ::2])
    with pytest.raises(ValueError):
        coarse_view(f, (4, 4))


def test_study_on_smooth_error_fields():
    grids = [LightConeGrid.square(n) for n in (9, 17, 33)]
    fields = [np.sin(np.pi * g.mesh()[0]) * g.hL**2 for g in grids]
    t = study("sin", grids, fields)
    assert t.order == pytest.approx(2.0, abs=1e-9)


def test_study_ignores_nan_nodes_and_rejects_empty_masks():
    grids = [LightConeGrid.square(n) for n in (9, 17)]
    fields = [np.full(g.shape, g.hL) for g in grids]
    fields[1][::2, ::2][4, 4] = np.nan
    fields[0][3, 3] = 1e6
    fields[1][6, 6] = np.nan  # coarse node (3, 3)
    t = study("c", grids, fields)
    assert t.errors == pytest.approx((1 / 8, 1 / 16))
    with pytest.raises(ValueError):
        study("c", grids, [np.full(g.shape, np.nan) for g in grids])
