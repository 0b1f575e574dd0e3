"""Refinement studies: errors on nested grids and observed convergence orders."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import interior_mask


@dataclass(frozen=True)
class ConvergenceTable:
    """Errors ``e_k`` at spacings ``h_k`` with pairwise and fitted orders.

    The fitted order is the least-squares slope of ``log e`` against
    ``log h`` over all levels; ``pairwise[k]`` compares levels k and k+1.
    """

    label: str
    h: tuple
    errors: tuple

    @property
    def pairwise(self):
        e, h = np.asarray(self.errors), np.asarray(self.h)
        return tuple(float(v) for v in np.log(e[:-1] / e[1:]) / np.log(h[:-1] / h[1:]))

    @property
    def order(self):
        slope, _ = np.polyfit(np.log(self.h), np.log(self.errors), 1)
        return float(slope)

    def decreasing(self):
        return bool(np.all(np.diff(self.errors) < 0))

    def to_dict(self):
        return {"label": self.label, "h": list(self.h), "errors": list(self.errors),
                "pairwise_orders": list(self.pairwise), "order": self.order}

    def format(self):
        lines = [f"{self.label}: fitted order {self.order:.3f}"]
        orders = ("",) + tuple(f"{p:.3f}" for p in self.pairwise)
        for h, e, p in zip(self.h, self.errors, orders):
            lines.append(f"  h={h:.6g}  error={e:.6e}  {p}")
        return "\n".join(lines)


def coarse_view(values, coarse_shape):
    """Restrict a field on a refined grid to the nodes of the coarse grid."""
    nL, nR = values.shape[:2]
    kL = (nL - 1) // (coarse_shape[0] - 1)
    kR = (nR - 1) // (coarse_shape[1] - 1)
    if (coarse_shape[0] - 1) * kL != nL - 1 or (coarse_shape[1] - 1) * kR != nR - 1:
        raise ValueError(f"grid {nL}x{nR} is not a refinement of {coarse_shape}")
    return values[::kL, ::kR]


def study(label, grids, fields, mask=None, margin=2, reduce=np.max):
    """Convergence table of per-node error ``fields`` on the coarsest nodes.

    ``fields[k]`` lives on ``grids[k]``; all are compared on the nodes of
    ``grids[0]`` inside ``mask`` (default: at least ``margin`` nodes from
    the edge) with NaN treated as excluded.
    """
    coarse = grids[0].shape
    if mask is None:
        mask = interior_mask(coarse, margin)
    views = [coarse_view(np.asarray(f), coarse) for f in fields]
    for v in views:
        mask = mask & np.isfinite(v)
    if not np.any(mask):
        raise ValueError(f"{label}: no common nodes to compare")
    errs = tuple(float(reduce(v[mask])) for v in views)
    return ConvergenceTable(label, tuple(float(g.hL) for g in grids), errs)


__all__ = ["ConvergenceTable", "coarse_view", "study"]
