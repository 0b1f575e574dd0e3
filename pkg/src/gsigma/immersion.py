"""Weierstrass immersion: integrate the closed su(N)-valued 1-form into a surface.

On solutions the 1-form ``Z_L dxi_L + Z_R dxi_R`` is closed, so on the
(simply connected) grid it has a potential ``Z`` with ``d_L Z = Z_L`` and
``d_R Z = Z_R``, unique up to an additive constant.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import norm, standard_basis, to_coordinates
from .exceptions import GridError
from .field import tangent_vectors


def tangent_field(gfield, exact=True):
    """``(Z_L, Z_R)`` at every node, shape ``(nL, nR, N, N)`` each."""
    return tangent_vectors(gfield.jets(exact=exact))


def _cumtrapz_from(f, h, axis, k0):
    """Trapezoidal integral of ``f`` from index ``k0`` to every index along ``axis``."""
    f = np.moveaxis(f, axis, 0)
    steps = 0.5 * h * (f[1:] + f[:-1])
    total = np.concatenate([np.zeros_like(f[:1]), np.cumsum(steps, axis=0)])
    return np.moveaxis(total - total[k0], 0, axis)


@dataclass(frozen=True)
class SurfaceMesh:
    """Surface nodes ``Z`` in su(N) together with their R^(N^2-1) coordinates."""

    grid: object
    z: np.ndarray        # (nL, nR, N, N)
    coords: np.ndarray   # (nL, nR, N^2 - 1)
    basepoint: tuple
    z0: np.ndarray
    path: str = "row_first"
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n(self):
        return self.z.shape[-1]

    def projection_3d(self, axes=None):
        """Three coordinates per node, for plotting.

        ``axes`` selects three basis coordinates by index; by default the top
        three principal components of the node cloud are used.  Returns
        ``(points, info)`` with ``info`` describing the choice.
        """
        pts = self.coords.reshape(-1, self.coords.shape[-1])
        if axes is not None:
            axes = [int(a) for a in axes]
            if len(axes) != 3:
                raise ValueError("need exactly three coordinate indices")
            labels = standard_basis(self.n).labels
            return pts[:, axes], {"method": "basis", "axes": axes,
                                  "labels": [labels[a] for a in axes]}
        centered = pts - pts.mean(axis=0)
        _, s, vt = np.linalg.svd(centered, full_matrices=False)
        comps = vt[:3]
        proj = centered @ comps.T
        if proj.shape[1] < 3:
            proj = np.pad(proj, ((0, 0), (0, 3 - proj.shape[1])))
        return proj, {"method": "pca", "singular_values": s[:3].tolist(),
                      "components": comps.tolist()}

    def to_dict(self, include_matrices=True):
        nL, nR = self.z.shape[:2]
        out = {
            "format": "gsigma.surface",
            "version": 1,
            "n": self.n,
            "grid": self.grid.to_dict(),
            "basepoint": list(self.basepoint),
            "path": self.path,
            "basis": list(standard_basis(self.n).labels),
            "coords": self.coords.tolist(),
            "meta": self.meta,
        }
        if include_matrices:
            out["z"] = np.stack([self.z.real, self.z.imag], axis=-1).tolist()
        return out


def weierstrass_integrate(gfield, basepoint=(0, 0), z0=None, *, path="row_first",
                          exact=True, tangents=None):
    """Integrate ``(Z_L, Z_R)`` with the trapezoidal rule from ``basepoint``.

    ``path='row_first'`` (the canonical path) goes along xi_L on the
    basepoint's row, then along xi_R; ``'column_first'`` does the reverse.
    The two agree up to the enclosed plaquette circulations.
    """
    grid = gfield.grid
    try:
        i0, j0 = grid.check_node(basepoint)
    except (TypeError, ValueError) as exc:
        raise GridError(f"invalid basepoint {basepoint!r}") from exc
    n = gfield.n
    if z0 is None:
        z0 = np.zeros((n, n), dtype=complex)
    z0 = np.asarray(z0, dtype=complex)
    zl, zr = tangent_field(gfield, exact) if tangents is None else tangents
    if path == "row_first":
        base_row = _cumtrapz_from(zl[:, j0], grid.hL, 0, i0)          # (nL, N, N)
        z = base_row[:, None] + _cumtrapz_from(zr, grid.hR, 1, j0)
    elif path == "column_first":
        base_col = _cumtrapz_from(zr[i0, :], grid.hR, 0, j0)          # (nR, N, N)
        z = base_col[None, :] + _cumtrapz_from(zl, grid.hL, 0, i0)
    else:
        raise ValueError(f"unknown path {path!r}")
    z = z + z0
    basis = standard_basis(n)
    return SurfaceMesh(grid, z, to_coordinates(z, basis), (i0, j0), z0, path)


def plaquette_circulations(gfield, exact=True, tangents=None):
    """Trapezoidal circulation of the 1-form around every grid cell.

    Returns an array of shape ``(nL-1, nR-1, N, N)``; counter-clockwise in
    the (xi_L, xi_R) plane.
    """
    grid = gfield.grid
    zl, zr = tangent_field(gfield, exact) if tangents is None else tangents
    hL, hR = grid.hL, grid.hR
    bottom = 0.5 * hL * (zl[:-1, :-1] + zl[1:, :-1])
    right = 0.5 * hR * (zr[1:, :-1] + zr[1:, 1:])
    top = 0.5 * hL * (zl[:-1, 1:] + zl[1:, 1:])
    left = 0.5 * hR * (zr[:-1, :-1] + zr[:-1, 1:])
    return bottom + right - top - left


def loop_closedness_residual(gfield, exact=True, tangents=None, reduce="max"):
    """Largest plaquette circulation divided by the plaquette area.

    This approximates the norm of ``dZ = (d_L Z_R - d_R Z_L) dxi_L ^ dxi_R``;
    it tends to zero under refinement for solutions and to a positive limit
    otherwise.  ``reduce=None`` returns the per-plaquette array.
    """
    grid = gfield.grid
    if min(grid.shape) < 2:
        raise GridError("closedness needs at least 2 x 2 nodes")
    density = norm(plaquette_circulations(gfield, exact, tangents)) / (grid.hL * grid.hR)
    if reduce is None:
        return density
    return float(np.max(density))


def path_discrepancy_bound(gfield, basepoint=(0, 0), exact=True, tangents=None):
    """Per node: summed circulation norms of the cells between basepoint and node.

    ``|Z_row_first - Z_column_first|`` at a node never exceeds this bound.
    """
    grid = gfield.grid
    i0, j0 = grid.check_node(basepoint)
    c = norm(plaquette_circulations(gfield, exact, tangents))
    cs = np.zeros((grid.nL, grid.nR))
    cs[1:, 1:] = np.cumsum(np.cumsum(c, axis=0), axis=1)

    I, J = np.meshgrid(np.arange(grid.nL), np.arange(grid.nR), indexing="ij")
    lo_i, hi_i = np.minimum(I, i0), np.maximum(I, i0)
    lo_j, hi_j = np.minimum(J, j0), np.maximum(J, j0)
    return cs[hi_i, hi_j] - cs[lo_i, hi_j] - cs[hi_i, lo_j] + cs[lo_i, lo_j]


__all__ = [
    "SurfaceMesh", "tangent_field", "weierstrass_integrate", "plaquette_circulations",
    "loop_closedness_residual", "path_discrepancy_bound",
]
