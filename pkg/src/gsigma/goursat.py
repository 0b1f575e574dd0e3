"""Characteristic (Goursat) solver for the field equation on a light-cone grid.

Data are prescribed on the two characteristics ``xi_R = xi_R0`` and
``xi_L = xi_L0``; the solution is marched cell by cell.  The second
derivative is split into its part orthogonal to X, fixed by the field
equation,

    P d_L d_R X = P (d_L X X^dagger d_R X + d_R X X^dagger d_L X),

and its part along X, fixed by differentiating ``X^dagger X = 1`` with the
anti-hermitian (gauge) freedom set to zero:

    X^dagger d_L d_R X = -(d_L X^dagger d_R X + d_R X^dagger d_L X) / 2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import dag, fro, random_stiefel
from .exceptions import SolverError
from .field import check_stiefel, retract
from .grid import GridField

#: coefficient of the first-derivative term in the light-cone field equation
TANGENTIAL_COUPLING = 1.0


def rhs(x, xl, xr, coupling=TANGENTIAL_COUPLING):
    """``d_L d_R X`` as a function of ``X`` and its first derivatives."""
    xh = dag(x)
    p = np.eye(x.shape[-2]) - x @ xh
    normal = coupling * (p @ (xl @ xh @ xr + xr @ xh @ xl))
    along = -0.5 * (dag(xl) @ xr + dag(xr) @ xl)
    return normal + x @ along


def _sample(data, coords, label):
    if callable(data):
        values = np.asarray(data(coords), dtype=complex)
    else:
        values = np.asarray(data, dtype=complex)
    if values.ndim != 3 or values.shape[0] != coords.shape[0]:
        raise SolverError(f"{label} data must give one N x m frame per grid line, got {values.shape}")
    return check_stiefel(values)


def goursat_solve(left, right, grid, *, coupling=TANGENTIAL_COUPLING,
                  tol=1e-14, max_iter=60, corner_tol=1e-10, min_singular=1e-6):
    """March the characteristic initial value problem across ``grid``.

    Parameters
    ----------
    left : callable or array
        Data on ``xi_R = grid.xiR0`` as a function of ``xi_L`` (or the
        ``(nL, N, m)`` samples).
    right : callable or array
        Data on ``xi_L = grid.xiL0`` as a function of ``xi_R``.
    grid : LightConeGrid

    Each cell is closed with the second-order rectangle rule

        X11 = X10 + X01 - X00 + hL hR F(midpoint values),

    solved by fixed-point iteration and followed by polar retraction.
    Cells on one anti-diagonal are independent and are processed together.

    Returns
    -------
    GridField
        ``meta`` records the largest retraction correction and the
        smallest chart singular value encountered.
    """
    xl_line = _sample(left, grid.xiL, "left")
    xr_line = _sample(right, grid.xiR, "right")
    mismatch = float(fro(xl_line[0] - xr_line[0]))
    if mismatch > corner_tol:
        raise SolverError(f"corner mismatch {mismatch:.3e} between left and right data")
    nL, nR = grid.shape
    n, m = xl_line.shape[-2:]
    hL, hR = grid.hL, grid.hR
    X = np.empty((nL, nR, n, m), dtype=complex)
    X[:, 0] = xl_line
    X[0, :] = xr_line
    max_retraction = 0.0
    iters = 0
    for s in range(nL + nR - 3):
        i = np.arange(max(0, s - (nR - 2)), min(s, nL - 2) + 1)
        j = s - i
        o, south, west = X[i, j], X[i + 1, j], X[i, j + 1]
        base = south + west - o
        y = base.copy()
        for it in range(max_iter):
            xc = 0.25 * (o + south + west + y)
            dl = (south + y - o - west) / (2 * hL)
            dr = (west + y - o - south) / (2 * hR)
            y_new = base + hL * hR * rhs(xc, dl, dr, coupling)
            if not np.all(np.isfinite(y_new)):
                raise SolverError(f"non-finite update on anti-diagonal {s}")
            delta = np.max(np.abs(y_new - y))
            y = y_new
            if delta <= tol * (1.0 + np.max(np.abs(y))):
                break
        else:
            raise SolverError(
                f"cell iteration diverged on anti-diagonal {s} (last change {delta:.3e}); "
                "reduce the step size")
        iters = max(iters, it + 1)
        sv = np.linalg.svd(y, compute_uv=False)
        if np.min(sv) < min_singular:
            k = int(np.argmin(np.min(sv, axis=-1)))
            node = (int(i[k] + 1), int(j[k] + 1))
            raise SolverError(f"rank-deficient update at node {node} "
                              f"(xi_L={grid.xiL[node[0]]:.6g}, xi_R={grid.xiR[node[1]]:.6g})")
        yr = retract(y)
        max_retraction = max(max_retraction, float(np.max(fro(yr - y))))
        X[i + 1, j + 1] = yr
    chart = np.linalg.svd(X[..., :m, :], compute_uv=False)
    meta = {
        "solver": "goursat-rectangle",
        "coupling": coupling,
        "max_retraction": max_retraction,
        "max_cell_iterations": iters,
        "min_chart_singular_value": float(np.min(chart)),
    }
    return GridField(grid, X, provenance="solved", meta=meta)


@dataclass(frozen=True)
class TrigCurve:
    """Smooth Stiefel-valued curve for initial data.

    ``X(t) = retract(x0 + s v + sum_k a_k (cos(k w s) - 1) + b_k sin(k w s))``
    with ``s = t - t0``, so ``X(t0) = x0`` exactly.
    """

    x0: np.ndarray
    velocity: np.ndarray
    cos_modes: np.ndarray  # (K, N, m)
    sin_modes: np.ndarray
    omega: float
    t0: float = 0.0

    def __call__(self, t):
        s = np.asarray(t, float) - self.t0
        k = np.arange(1, len(self.cos_modes) + 1)
        ks = self.omega * k * s[..., None]
        y = self.x0 + s[..., None, None] * self.velocity
        y = y + np.einsum("...k,kab->...ab", np.cos(ks) - 1.0, self.cos_modes)
        y = y + np.einsum("...k,kab->...ab", np.sin(ks), self.sin_modes)
        return retract(y)


def random_initial_data(n, m, seed, *, modes=3, amplitude=0.25, speed=1.0,
                        period=1.0, origin=(0.0, 0.0)):
    """Reproducible random smooth data ``(left, right)`` sharing their corner.

    Each curve is a drift of size ``speed`` orthogonal to span X plus a
    trigonometric polynomial whose k-th mode has size ``amplitude / k^2``.
    """
    rng = np.random.default_rng(seed)
    x0 = random_stiefel(n, m, rng)
    p = np.eye(n) - x0 @ dag(x0)

    def curve(t0):
        v = p @ (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m)))
        v *= speed / np.linalg.norm(v)
        shape = (modes, n, m)
        scale = amplitude / np.arange(1, modes + 1)[:, None, None] ** 2 / np.sqrt(2 * n * m)
        a = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        b = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        return TrigCurve(x0, v, a, b, 2 * np.pi / period, t0)

    return curve(origin[0]), curve(origin[1])


def analytic_boundary_data(solution, grid):
    """Characteristic data of an analytic solution on the two grid edges."""
    jl = solution.jet(grid.xiL, np.full(grid.nL, grid.xiR0))
    jr = solution.jet(np.full(grid.nR, grid.xiL0), grid.xiR)
    return jl.x, jr.x
