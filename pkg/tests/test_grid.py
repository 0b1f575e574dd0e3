import json

import numpy as np
import pytest

from gsigma.catalog import balanced_torus
from gsigma.exceptions import GridError
from gsigma.grid import GridField, LightConeGrid, d1, d2, interior_mask


def test_grid_basics():
    g = LightConeGrid.square(5, 2.0, (-1.0, 0.5))
    assert g.shape == (5, 5)
    np.testing.assert_allclose(g.xiL, [-1, -0.5, 0, 0.5, 1])
    L, R = g.mesh()
    assert L[2, 0] == 0.0 and R[0, 4] == 2.5
    f = g.refine(4)
    assert f.shape == (17, 17) and f.hL == pytest.approx(0.125)
    assert LightConeGrid.from_dict(g.to_dict()) == g


@pytest.mark.parametrize("kw", [dict(nL=1, nR=5, hL=0.1, hR=0.1),
                                dict(nL=5, nR=5, hL=0.0, hR=0.1),
                                dict(nL=5, nR=5, hL=0.1, hR=-1.0)])
def test_grid_validation(kw):
    with pytest.raises(GridError):
        LightConeGrid(**kw)


def test_check_node():
    g = LightConeGrid.square(4)
    assert g.check_node((3, 0)) == (3, 0)
    with pytest.raises(GridError):
        g.check_node((4, 0))


def test_interior_mask():
    m = interior_mask((6, 5), 2)
    assert m.sum() == 2 * 1
    assert not m[1, 2] and m[2, 2]


@pytest.mark.parametrize("op,deriv", [(d1, np.cos), (d2, lambda x: -np.sin(x))])
def test_fd_second_order(op, deriv):
    errs = []
    for n in (17, 33, 65):
        x = np.linspace(0, 1, n)
        errs.append(np.max(np.abs(op(np.sin(x), x[1] - x[0], 0) - deriv(x))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.8)


def test_fd_jets_approximate_exact_jets():
    sol = balanced_torus(1.0, -0.5, 0.3, 0.8)
    errs = []
    for n in (17, 33):
        gf = sol.sample(LightConeGrid.square(n, 1.0))
        fd, ex = gf.jets(exact=False), gf.jets()
        errs.append(max(np.max(np.abs(getattr(fd, k) - getattr(ex, k)))
                        for k in ("dL", "dR", "dLL", "dLR", "dRR")))
    assert errs[1] < errs[0] / 3.5


def test_gridfield_round_trip_json():
    gf = balanced_torus(1, 0, 0, 1).sample(LightConeGrid.square(5))
    d = json.loads(json.dumps(gf.to_dict()))
    back = GridField.from_dict(d)
    np.testing.assert_array_equal(back.frames, gf.frames)
    assert back.grid == gf.grid and back.provenance == "analytic"


def test_gridfield_validation():
    g = LightConeGrid.square(3)
    with pytest.raises(GridError):
        GridField(g, np.ones((3, 3, 2, 1)))
    with pytest.raises(GridError):
        GridField(g, np.zeros((2, 3, 2, 1)))
    with pytest.raises(GridError):
        GridField.from_dict({"format": "other"})
