"""Moving frames of the surface and the Gauss-Weingarten structure.

At each point an SU(N) element Phi with ``X = Phi (1_m; 0)`` is built.  In
the Phi-frame the tangents occupy only the off-diagonal blocks; normals
are the diagonal-block basis elements together with a Gram-Schmidt
completion of the tangents inside the off-diagonal subspace, all
conjugated back by Phi.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import (dag, fro, from_coordinates, inner_product,
                      standard_basis, to_coordinates)
from .exceptions import BlockStructureError, DegenerateMetricError
from .field import _proj, check_stiefel, tangent_vectors
from .geometry import (MetricData, erode, metric_from_tangents,
                       second_derivatives_Z)
from .grid import d1

#: residual norm below which a Gram-Schmidt candidate is discarded
GS_DISCARD = 1e-8
BLOCK_TOL = 1e-9
#: seeded pivots only consider candidates this close to the best residual
SEED_PIVOT_RATIO = 0.5


def complete_to_group(x0, seed=None, pivots=None, return_info=False):
    """SU(N) completion ``Phi`` of a Stiefel frame: first m columns equal ``x0``.

    Canonical vectors ``e_k`` are orthogonalized against the columns built
    so far, always taking the candidate with the largest residual (lowest
    index on ties) unless ``pivots`` fixes the choice.  With ``seed`` the
    pivot is instead the first candidate, in a seeded random order, whose
    residual is at least ``SEED_PIVOT_RATIO`` of the largest; this gives a
    different but equally valid Phi.  Finally the last column is scaled by
    ``det(Phi)^-1``.

    Works on batches; with ``return_info`` also returns
    ``{'pivots': ..., 'conditioning': ...}`` where conditioning is the
    smallest residual norm used.
    """
    x0 = check_stiefel(x0)
    n, m = x0.shape[-2:]
    batch = x0.shape[:-2]
    eye = np.eye(n)
    q = x0
    chosen = []
    cond = np.full(batch, np.inf)
    rank = None
    if seed is not None and pivots is None:
        # position of each candidate in the seeded order
        rank = np.argsort(np.random.default_rng(seed).permutation(n))
    for step in range(n - m):
        r = eye - q @ dag(q)
        r = r - q @ (dag(q) @ r)  # second pass
        norms = np.sqrt(np.sum(np.abs(r) ** 2, axis=-2))
        if rank is not None:
            ok = norms >= SEED_PIVOT_RATIO * np.max(norms, axis=-1, keepdims=True)
            k = np.argmin(np.where(ok, rank, n), axis=-1)
        elif pivots is None:
            k = np.argmax(norms, axis=-1)
        else:
            k = np.broadcast_to(np.asarray(pivots)[..., step], batch)
        k = np.asarray(k)
        col = np.take_along_axis(r, k[..., None, None], axis=-1)
        nk = np.take_along_axis(norms, k[..., None], axis=-1)[..., 0]
        cond = np.minimum(cond, nk)
        q = np.concatenate([q, col / nk[..., None, None]], axis=-1)
        chosen.append(k)
    phi = q.copy()
    det = np.linalg.det(phi)
    phi[..., :, -1] *= (1.0 / det)[..., None]
    if return_info:
        piv = np.stack(chosen, axis=-1) if chosen else np.zeros(batch + (0,), int)
        return phi, {"pivots": piv, "conditioning": cond}
    return phi


def block_masks(n, m):
    """Boolean masks of the diagonal (m x m, n x n) and off-diagonal blocks."""
    top = np.arange(n) < m
    diag = top[:, None] == top[None, :]
    return diag, ~diag


def conjugated_tangents(phi, zl, zr, m, tol=BLOCK_TOL):
    """``Phi^dagger Z_D Phi`` for D = L, R, checked to be block off-diagonal.

    Raises :class:`BlockStructureError` if a diagonal block exceeds ``tol``
    relative to the tangent norm, which signals that Phi does not belong to X.
    """
    out = []
    diag, _ = block_masks(phi.shape[-1], m)
    for z in (zl, zr):
        t = dag(phi) @ z @ phi
        leak = np.sqrt(np.sum(np.abs(np.where(diag, t, 0)) ** 2, axis=(-2, -1)))
        scale = fro(z)
        if np.any(leak > tol * np.maximum(scale, np.finfo(float).tiny)):
            raise BlockStructureError(
                f"conjugated tangent has diagonal-block norm {np.max(leak):.3e} "
                f"(tangent norm {np.max(scale):.3e})")
        out.append(t)
    return tuple(out)


def _split_indices(n, m):
    """Standard-basis indices of off-diagonal and diagonal-block elements."""
    basis = standard_basis(n)
    diag, _ = block_masks(n, m)
    off, on = [], []
    for k, e in enumerate(basis.elements):
        (on if np.all(np.abs(e[~diag]) == 0) else off).append(k)
    return np.array(off), np.array(on)


def _orthonormal_tangents(tl, tr):
    """Orthonormal basis of span(t_L, t_R) (batch of real vectors)."""
    nl = np.linalg.norm(tl, axis=-1)
    q1 = tl / nl[..., None]
    r = tr - np.sum(tr * q1, axis=-1)[..., None] * q1
    nr = np.linalg.norm(r, axis=-1)
    return q1, r / nr[..., None], np.minimum(nl, nr)


def _gs_sweep(q_init, dim, target, selection=None):
    """Extend orthonormal columns ``q_init`` (batch, dim, 2) by unit vectors.

    Candidates are the canonical unit vectors of R^dim in order.  Returns the
    new orthonormal vectors (batch, target, dim), the candidate index used
    for each, and the smallest accepted residual.
    """
    batch = q_init.shape[:-2]
    if selection is not None:
        selection = np.broadcast_to(np.asarray(selection), batch + (target,))
        selection = selection.reshape(-1, target)
    q_init = q_init.reshape((-1,) + q_init.shape[-2:])
    vecs, used, cond = _gs_sweep_flat(q_init, dim, target, selection)
    return (vecs.reshape(batch + vecs.shape[1:]), used.reshape(batch + (target,)),
            cond.reshape(batch))


def _gs_sweep_flat(q_init, dim, target, selection):
    batch = q_init.shape[:-2]
    q = np.concatenate([q_init, np.zeros(batch + (dim, target))], axis=-1)
    count = np.zeros(batch, dtype=int)
    used = np.full(batch + (target,), -1)
    cond = np.full(batch, np.inf)
    cand = range(dim) if selection is None else None
    if selection is not None:
        for slot in range(target):
            e = np.zeros(batch + (dim,))
            np.put_along_axis(e, selection[..., slot:slot + 1], 1.0, axis=-1)
            r = _project_out(q, e)
            nr = np.linalg.norm(r, axis=-1)
            cond = np.minimum(cond, nr)
            # zero residuals give NaN columns; cond flags those nodes
            with np.errstate(invalid="ignore", divide="ignore"):
                q[..., :, 2 + slot] = r / nr[..., None]
        return np.swapaxes(q[..., :, 2:], -1, -2), selection.copy(), cond
    for k in cand:
        e = np.zeros(batch + (dim,))
        e[..., k] = 1.0
        r = _project_out(q, e)
        nr = np.linalg.norm(r, axis=-1)
        take = (nr >= GS_DISCARD) & (count < target)
        if not np.any(take):
            continue
        idx = np.nonzero(take)
        slot = count[idx] + 2
        q[idx + (slice(None), slot)] = r[idx] / nr[idx][..., None]
        used[idx + (count[idx],)] = k
        cond[idx] = np.minimum(cond[idx], nr[idx])
        count[idx] += 1
    if np.any(count < target):
        raise DegenerateMetricError("Gram-Schmidt could not complete the normal basis")
    return np.swapaxes(q[..., :, 2:], -1, -2), used, cond


def _project_out(q, v):
    # modified Gram-Schmidt with one reorthogonalization pass
    for _ in range(2):
        v = v - np.einsum("...ik,...k->...i", q, np.einsum("...ik,...i->...k", q, v))
    return v


@dataclass(frozen=True)
class FrameBundle:
    """Moving frame ``(Z_L, Z_R, n_3, ..., n_{N^2-1})`` at one node or a batch.

    ``normals`` has shape ``(..., N^2 - 3, N, N)``; the first ``2mn - 2``
    come from Gram-Schmidt in the off-diagonal subspace, the rest are the
    diagonal-block basis elements conjugated by ``phi``.
    """

    phi: np.ndarray
    zl: np.ndarray
    zr: np.ndarray
    normals: np.ndarray
    provenance: tuple
    m: int
    pivots: np.ndarray = field(repr=False)
    selection: np.ndarray = field(repr=False)
    conditioning: np.ndarray = field(repr=False)

    @property
    def n(self):
        return self.phi.shape[-1]

    @property
    def count(self):
        return self.normals.shape[-3]

    def gram(self):
        nrm = self.normals
        return inner_product(nrm[..., :, None, :, :], nrm[..., None, :, :, :])

    def tangent_products(self):
        """``(Z_D, n_j)`` for D = L, R; shape ``(..., 2, N^2 - 3)``."""
        nrm = self.normals
        return np.stack([inner_product(self.zl[..., None, :, :], nrm),
                         inner_product(self.zr[..., None, :, :], nrm)], axis=-2)

    def coords(self):
        """Frame vectors in R^(N^2-1): rows Z_L, Z_R, n_3, ..."""
        tau = np.concatenate([self.zl[..., None, :, :], self.zr[..., None, :, :],
                              self.normals], axis=-3)
        return to_coordinates(tau)


def build_normals(phi, zl, zr, m, metric: Optional[MetricData] = None,
                  selection=None, pivots=None):
    """Orthonormal normal frame at regular points.

    Returns a :class:`FrameBundle` with ``N^2 - 3`` normals orthogonal to
    both tangents.  Raises :class:`DegenerateMetricError` where det G is at
    or below the regularity threshold or the tangents are dependent.
    """
    n = phi.shape[-1]
    if metric is None:
        metric = metric_from_tangents(zl, zr)
    if np.any(~metric.regular()):
        raise DegenerateMetricError(
            f"det G = {np.min(metric.detG):.3e} at or below regularity threshold")
    tl, tr = conjugated_tangents(phi, zl, zr, m)
    basis = standard_basis(n)
    off, on = _split_indices(n, m)
    cl = to_coordinates(tl, basis)[..., off]
    cr = to_coordinates(tr, basis)[..., off]
    q1, q2, tcond = _orthonormal_tangents(cl, cr)
    if np.any(tcond < GS_DISCARD):
        raise DegenerateMetricError("tangent vectors are linearly dependent")
    target = len(off) - 2
    q_init = np.stack([q1, q2], axis=-1)
    offn, used, cond = _gs_sweep(q_init, len(off), target, selection)
    batch = phi.shape[:-2]
    full = np.zeros(batch + (target, basis.dim))
    full[..., off] = offn
    tilde_off = from_coordinates(full, basis)
    tilde_on = np.broadcast_to(basis.elements[on], batch + (len(on), n, n))
    tilde = np.concatenate([tilde_off, tilde_on], axis=-3)
    ph = phi[..., None, :, :]
    normals = ph @ tilde @ dag(ph)
    prov = tuple(["offdiag-gs"] * target + [f"diag:{basis.labels[k]}" for k in on])
    if pivots is None:
        pivots = np.zeros(batch + (0,), int)
    return FrameBundle(phi, zl, zr, normals, prov, m, pivots, used, np.minimum(cond, tcond))


def frame_at(jet, seed=None, pivots=None, selection=None):
    """Complete frame at a jet (or a batch of jets) of a field."""
    phi, info = complete_to_group(jet.x, seed=seed, pivots=pivots, return_info=True)
    zl, zr = tangent_vectors(jet)
    bundle = build_normals(phi, zl, zr, jet.m, selection=selection, pivots=info["pivots"])
    return bundle


def projector_normal(x):
    """Unit normal ``i((N - m) 1 - N P)`` (normalized), built from P alone.

    It is traceless because ``tr P = N - m`` and commutes with P, so it lies
    in the diagonal-block normal space at every point.
    """
    x = check_stiefel(x)
    n, m = x.shape[-2:]
    a = 1j * ((n - m) * np.eye(n) - n * _proj(x))
    return a / np.sqrt(inner_product(a, a))[..., None, None]


@dataclass(frozen=True)
class GaussWeingartenData:
    """Coefficients of ``d_L tau = U tau`` and ``d_R tau = V tau``.

    ``u`` and ``v`` are ``(N^2-1) x (N^2-1)`` real matrices in the frame
    ordering ``(Z_L, Z_R, n_3, ...)``.
    """

    u: np.ndarray
    v: np.ndarray
    A: dict          # A^D_B coefficients keyed 'LL', 'LR', 'RL', 'RR'
    Q: dict          # Q^D_j keyed 'L', 'R'
    H: np.ndarray    # H_j
    alpha: dict
    beta: dict
    sL: np.ndarray
    sR: np.ndarray
    metric: MetricData

    def antisymmetry_defect(self):
        """``max |s_jk + s_kj|`` over both directions, per node."""
        dl = np.abs(self.sL + np.swapaxes(self.sL, -1, -2))
        dr = np.abs(self.sR + np.swapaxes(self.sR, -1, -2))
        return np.maximum(dl.max(axis=(-2, -1)), dr.max(axis=(-2, -1)))

    def mean_curvature_norm(self):
        """``|H|`` from the frame coefficients."""
        g = self.metric
        hj = (g.gRR[..., None] * self.Q["L"] - 2 * g.gLR[..., None] * self.H
              + g.gLL[..., None] * self.Q["R"]) / g.detG[..., None]
        return np.sqrt(np.sum(hj**2, axis=-1))


def gw_coefficients(jet, bundle, metric=None, dnormals=None):
    """Assemble U and V at each node.

    ``dnormals`` is the pair ``(d_L n_j, d_R n_j)`` (same shape as
    ``bundle.normals``), typically finite differences of a normal field.
    Without it the ``s`` blocks are left as NaN.
    """
    if metric is None:
        metric = metric_from_tangents(bundle.zl, bundle.zr)
    if np.any(~metric.regular()):
        raise DegenerateMetricError("Gauss-Weingarten coefficients need a regular metric")
    zl, zr = bundle.zl, bundle.zr
    zll, zlr, zrr = second_derivatives_Z(jet)
    nrm = bundle.normals
    det = metric.detG
    jl, jr, g = metric.gLL, metric.gRR, metric.gLR

    def solve(dd):
        bl, br = inner_product(dd, zl), inner_product(dd, zr)
        return (jr * bl - g * br) / det, (jl * br - g * bl) / det

    aLL, aLR = solve(zll)
    aRL, aRR = solve(zrr)
    qL = inner_product(zll[..., None, :, :], nrm)
    qR = inner_product(zrr[..., None, :, :], nrm)
    h = inner_product(zlr[..., None, :, :], nrm)
    ex = (..., None)
    alphaL = (h * g[ex] - qL * jr[ex]) / det[ex]
    betaL = (qL * g[ex] - h * jl[ex]) / det[ex]
    alphaR = (qR * g[ex] - h * jr[ex]) / det[ex]
    betaR = (h * g[ex] - qR * jl[ex]) / det[ex]
    k = nrm.shape[-3]
    batch = nrm.shape[:-3]
    if dnormals is None:
        sL = np.full(batch + (k, k), np.nan)
        sR = sL.copy()
    else:
        dnl, dnr = dnormals
        sL = inner_product(dnl[..., :, None, :, :], nrm[..., None, :, :, :])
        sR = inner_product(dnr[..., :, None, :, :], nrm[..., None, :, :, :])
    d = k + 2
    u = np.zeros(batch + (d, d))
    v = np.zeros(batch + (d, d))
    u[..., 0, 0], u[..., 0, 1], u[..., 0, 2:] = aLL, aLR, qL
    u[..., 1, 2:] = h
    u[..., 2:, 0], u[..., 2:, 1], u[..., 2:, 2:] = alphaL, betaL, sL
    v[..., 0, 2:] = h
    v[..., 1, 0], v[..., 1, 1], v[..., 1, 2:] = aRL, aRR, qR
    v[..., 2:, 0], v[..., 2:, 1], v[..., 2:, 2:] = alphaR, betaR, sR
    return GaussWeingartenData(
        u, v, {"LL": aLL, "LR": aLR, "RL": aRL, "RR": aRR}, {"L": qL, "R": qR}, h,
        {"L": alphaL, "R": alphaR}, {"L": betaL, "R": betaR}, sL, sR, metric)


def gauss_codazzi_residual(u, v, grid):
    """Frobenius norm of ``d_R U - d_L V + [U, V]`` with FD derivatives."""
    res = d1(u, grid.hR, 1) - d1(v, grid.hL, 0) + u @ v - v @ u
    return np.sqrt(np.sum(res**2, axis=(-2, -1)))


@dataclass(frozen=True)
class FrameField:
    """Frames, Gauss-Weingarten data and compatibility residual on a grid."""

    grid: object
    bundle: FrameBundle
    gw: GaussWeingartenData
    gcr: np.ndarray
    valid: np.ndarray    # nodes whose frame is well conditioned on the whole stencil
    reference: tuple

    def to_dict(self):
        """Per-node Phi, normals, U, V and exclusion flags."""
        def cplx(a):
            return np.stack([a.real, a.imag], axis=-1).tolist()

        b = self.bundle
        return {
            "format": "gsigma.frame",
            "version": 1,
            "n": b.n,
            "m": b.m,
            "grid": self.grid.to_dict(),
            "reference": list(self.reference),
            "provenance": list(b.provenance),
            "layout": "per-node arrays indexed [i][j]; complex entries as [re, im]",
            "phi": cplx(b.phi),
            "normals": cplx(b.normals),
            "u": self.gw.u.tolist(),
            "v": self.gw.v.tolist(),
            "gcr": self.gcr.tolist(),
            "excluded": (~self.valid).tolist(),
        }


def freeze_normals(bundle, reference, tol=1e-10):
    """Bundle whose normals are those of node ``reference`` at every node.

    Only meaningful when the normal space is the same everywhere (an affine
    plane); raises ``ValueError`` if the frozen normals are not orthogonal
    to the tangents at some node to ``tol``.
    """
    ref = bundle.normals[reference]
    normals = np.broadcast_to(ref, bundle.normals.shape).copy()
    frozen = FrameBundle(bundle.phi, bundle.zl, bundle.zr, normals,
                         tuple(f"frozen:{p}" for p in bundle.provenance), bundle.m,
                         bundle.pivots, bundle.selection, bundle.conditioning)
    scale = np.sqrt(np.maximum(inner_product(bundle.zl, bundle.zl),
                               inner_product(bundle.zr, bundle.zr)))
    leak = np.max(np.abs(frozen.tangent_products()), axis=(-2, -1)) / np.maximum(scale, 1.0)
    if np.max(leak) > tol:
        raise ValueError(f"normal space is not constant: tangent-normal product {np.max(leak):.3e}")
    return frozen


def normal_jumps(normals, max_jump=0.5):
    """Nodes where some normal differs from a grid neighbour by more than ``max_jump``.

    A fixed Gram-Schmidt selection can flip a normal's sign across a curve
    where its residual passes through zero; when that curve falls between
    nodes the conditioning alone does not reveal it.
    """
    bad = np.zeros(normals.shape[:2], dtype=bool)
    for axis in (0, 1):
        step = np.sqrt(np.sum(np.abs(np.diff(normals, axis=axis)) ** 2, axis=(-2, -1))).max(axis=-1)
        jump = step > max_jump
        lo = [slice(None)] * 2
        hi = [slice(None)] * 2
        lo[axis], hi[axis] = slice(None, -1), slice(1, None)
        bad[tuple(lo)] |= jump
        bad[tuple(hi)] |= jump
    return bad


def frame_field(gfield, seed=None, exact=True, reference=None, min_conditioning=0.1,
                max_jump=0.5, normals="moving"):
    """Moving frames over a whole grid with one fixed pivot/selection pattern.

    The pivot and Gram-Schmidt choices are taken at ``reference`` (default:
    the grid centre) and reused at every node so that the frame varies
    smoothly; nodes where that choice is poorly conditioned or the normals
    jump (see :func:`normal_jumps`), or whose stencil touches such a node,
    are marked invalid.

    ``normals='frozen'`` keeps the reference node's normals everywhere
    (see :func:`freeze_normals`), the natural frame of a flat surface.
    """
    if normals not in ("moving", "frozen"):
        raise ValueError(f"unknown normals mode {normals!r}")
    grid = gfield.grid
    jets = gfield.jets(exact=exact)
    if reference is None:
        reference = (grid.nL // 2, grid.nR // 2)
    ref_jet = jets[reference]
    ref = frame_at(ref_jet, seed=seed)
    pivots = ref.pivots
    selection = ref.selection
    phi, info = complete_to_group(jets.x, seed=seed, pivots=pivots, return_info=True)
    zl, zr = tangent_vectors(jets)
    metric = metric_from_tangents(zl, zr)
    regular = metric.regular()
    if not np.all(regular):
        i, j = np.argwhere(~regular)[0]
        raise DegenerateMetricError(
            f"{int(np.sum(~regular))} degenerate nodes, first at node ({i}, {j}) "
            f"(xi_L={grid.xiL[i]:.6g}, xi_R={grid.xiR[j]:.6g}); restrict the field to a regular region")
    bundle = build_normals(phi, zl, zr, gfield.m, metric, selection=selection,
                           pivots=info["pivots"])
    if normals == "frozen":
        bundle = freeze_normals(bundle, reference)
    dn = (d1(bundle.normals, grid.hL, 0), d1(bundle.normals, grid.hR, 1))
    gw = gw_coefficients(jets, bundle, metric, dn)
    gcr = gauss_codazzi_residual(gw.u, gw.v, grid)
    good = (info["conditioning"] > min_conditioning) & (bundle.conditioning > min_conditioning)
    good &= ~normal_jumps(bundle.normals, max_jump)
    valid = erode(good, 2)
    return FrameField(grid, bundle, gw, gcr, valid, reference)


__all__ = [
    "complete_to_group", "conjugated_tangents", "build_normals", "frame_at",
    "projector_normal", "FrameBundle", "GaussWeingartenData", "gw_coefficients",
    "gauss_codazzi_residual", "frame_field", "FrameField", "block_masks", "freeze_normals",
    "normal_jumps",
]
