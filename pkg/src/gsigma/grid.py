"""Light-cone lattices, sampled fields and finite differences on them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import GridError
from .field import STIEFEL_TOL, FieldJet, stiefel_defect


@dataclass(frozen=True)
class LightConeGrid:
    """Rectangular lattice ``xi_L = xiL0 + i hL``, ``xi_R = xiR0 + j hR``.

    Node ``(i, j)`` has ``0 <= i < nL`` and ``0 <= j < nR``; arrays sampled
    on the grid carry the L index on axis 0 and the R index on axis 1.
    """

    nL: int
    nR: int
    hL: float
    hR: float
    xiL0: float = 0.0
    xiR0: float = 0.0

    def __post_init__(self):
        if not (self.hL > 0 and self.hR > 0):
            raise GridError(f"spacings must be positive, got hL={self.hL}, hR={self.hR}")
        if self.nL < 2 or self.nR < 2:
            raise GridError(f"need at least 2x2 nodes, got {self.nL}x{self.nR}")

    @classmethod
    def square(cls, nodes, length=1.0, origin=(0.0, 0.0)):
        h = length / (nodes - 1)
        return cls(nodes, nodes, h, h, *origin)

    @property
    def shape(self):
        return (self.nL, self.nR)

    @property
    def xiL(self):
        return self.xiL0 + self.hL * np.arange(self.nL)

    @property
    def xiR(self):
        return self.xiR0 + self.hR * np.arange(self.nR)

    def mesh(self):
        return np.meshgrid(self.xiL, self.xiR, indexing="ij")

    def refine(self, factor=2):
        return LightConeGrid((self.nL - 1) * factor + 1, (self.nR - 1) * factor + 1,
                             self.hL / factor, self.hR / factor, self.xiL0, self.xiR0)

    def check_node(self, node):
        i, j = node
        if not (0 <= i < self.nL and 0 <= j < self.nR):
            raise GridError(f"node {node} outside {self.nL}x{self.nR} grid")
        return int(i), int(j)

    def to_dict(self):
        return dict(nL=self.nL, nR=self.nR, hL=self.hL, hR=self.hR,
                    xiL0=self.xiL0, xiR0=self.xiR0)

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["nL"]), int(d["nR"]), float(d["hL"]), float(d["hR"]),
                   float(d.get("xiL0", 0.0)), float(d.get("xiR0", 0.0)))


def interior_mask(shape, margin=1):
    """Boolean mask excluding ``margin`` node layers at every boundary."""
    mask = np.zeros(shape, dtype=bool)
    if margin == 0:
        mask[...] = True
    elif shape[0] > 2 * margin and shape[1] > 2 * margin:
        mask[margin:-margin, margin:-margin] = True
    return mask


# -- finite differences --------------------------------------------------------

def d1(f, h, axis):
    """First derivative: centered in the interior, one-sided second order at edges."""
    return np.gradient(f, h, axis=axis, edge_order=2)


def d2(f, h, axis):
    """Second derivative, second order everywhere (one-sided 4-point at edges)."""
    f = np.moveaxis(np.asarray(f), axis, 0)
    if f.shape[0] < 4:
        raise GridError("second derivatives need at least 4 nodes per direction")
    out = np.empty_like(f)
    out[1:-1] = f[2:] - 2 * f[1:-1] + f[:-2]
    out[0] = 2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]
    out[-1] = 2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]
    return np.moveaxis(out / h**2, 0, axis)


def fd_jets(x, grid):
    """Derivative jets of a sampled field ``x`` of shape ``(nL, nR, N, m)``."""
    xl = d1(x, grid.hL, 0)
    xr = d1(x, grid.hR, 1)
    return FieldJet(
        x=x, dL=xl, dR=xr,
        dLL=d2(x, grid.hL, 0),
        dLR=d1(xl, grid.hR, 1),
        dRR=d2(x, grid.hR, 1),
    )


@dataclass(frozen=True)
class GridField:
    """Stiefel frames sampled at every node of a :class:`LightConeGrid`.

    ``exact_jets`` carries closed-form derivatives when the field was
    sampled from an analytic solution; otherwise derivatives come from
    finite differences.
    """

    grid: LightConeGrid
    frames: np.ndarray  # (nL, nR, N, m)
    provenance: str = "solved"
    exact_jets: Optional[FieldJet] = field(default=None, repr=False, compare=False)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.frames.shape[:2] != self.grid.shape:
            raise GridError(f"frames shape {self.frames.shape[:2]} != grid {self.grid.shape}")
        if self.provenance not in ("analytic", "solved"):
            raise GridError(f"unknown provenance {self.provenance!r}")
        err = np.max(stiefel_defect(self.frames))
        if not np.isfinite(err) or err > STIEFEL_TOL:
            raise GridError(f"node violates Stiefel constraint: {err:.3e}")

    @property
    def n(self):
        return self.frames.shape[-2]

    @property
    def m(self):
        return self.frames.shape[-1]

    def jets(self, exact=True):
        """Per-node jets: closed form if available (and ``exact``), else FD."""
        if exact and self.exact_jets is not None:
            return self.exact_jets
        return fd_jets(self.frames, self.grid)

    def to_dict(self):
        f = self.frames
        return {
            "format": "gsigma.gridfield",
            "version": 1,
            "n": self.n,
            "m": self.m,
            "grid": self.grid.to_dict(),
            "provenance": self.provenance,
            "layout": "nodes[i][j] row-major in (i=L, j=R); matrices as rows of [re, im]",
            "nodes": np.stack([f.real, f.imag], axis=-1).tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != "gsigma.gridfield":
            raise GridError("not a gsigma grid-field document")
        arr = np.asarray(d["nodes"], dtype=float)
        frames = arr[..., 0] + 1j * arr[..., 1]
        if frames.shape[-2:] != (d["n"], d["m"]):
            raise GridError("node matrices do not match declared (n, m)")
        return cls(LightConeGrid.from_dict(d["grid"]), frames, d["provenance"],
                   meta=d.get("meta", {}))
