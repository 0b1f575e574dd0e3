"""The Grassmannian field X, its projector and the field equations.

A point of G(m, n) = SU(N)/S(U(m) x U(n)) is represented by an N x m
matrix ``X`` with orthonormal columns (a Stiefel frame); only the projector
``P = 1 - X X^dagger`` is gauge invariant.  Derivatives are taken in the
light-cone coordinates xi_L, xi_R in which the Minkowski metric reads
``ds^2 = dxi_L dxi_R``.

All functions accept arrays with leading batch axes, so a whole grid of
jets can be processed at once.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .algebra import comm, check_unitary, dag, fro, random_stiefel, trace
from .exceptions import ConstraintError, DimensionError, MissingDerivativeError

#: admission tolerance for ||X^dagger X - 1||
STIEFEL_TOL = 1e-8


def stiefel_defect(x):
    x = np.asarray(x)
    return fro(dag(x) @ x - np.eye(x.shape[-1]))


def check_stiefel(x, tol=STIEFEL_TOL):
    """Validate an N x m Stiefel frame (1 <= m < N) and return it as complex."""
    x = np.asarray(x, dtype=complex)
    if x.ndim < 2:
        raise DimensionError(f"expected an N x m matrix, got shape {x.shape}")
    n, m = x.shape[-2:]
    if not 1 <= m < n:
        raise DimensionError(f"need 1 <= m < N, got N={n}, m={m}")
    err = np.max(stiefel_defect(x))
    if not np.isfinite(err) or err > tol:
        raise ConstraintError(f"||X^dagger X - 1|| = {err:.3e} exceeds {tol:.1e}")
    return x


@dataclass(frozen=True, eq=False)
class StiefelFrame:
    """A validated N x m frame ``X`` with ``X^dagger X = 1``.

    Usable wherever an array is expected (``np.asarray(frame)`` gives ``mat``).
    """

    mat: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mat", check_stiefel(self.mat))

    @property
    def n(self):
        return self.mat.shape[-2]

    @property
    def m(self):
        return self.mat.shape[-1]

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)

    @classmethod
    def random(cls, n, m, rng):
        """Haar-distributed frame from a numpy Generator."""
        return cls(random_stiefel(n, m, rng))


def retract(x):
    """Polar retraction ``X (X^dagger X)^(-1/2)`` onto the Stiefel manifold."""
    u, s, vh = np.linalg.svd(x, full_matrices=False)
    return u @ vh


@dataclass(frozen=True)
class FieldJet:
    """X together with its light-cone derivatives at one point (or a batch).

    ``dL``/``dR`` are the first derivatives; ``dLL``, ``dLR``, ``dRR`` the
    second ones, which may be absent.
    """

    x: np.ndarray
    dL: np.ndarray
    dR: np.ndarray
    dLL: Optional[np.ndarray] = None
    dLR: Optional[np.ndarray] = None
    dRR: Optional[np.ndarray] = None

    def __post_init__(self):
        shape = np.shape(self.x)
        for name in ("dL", "dR", "dLL", "dLR", "dRR"):
            v = getattr(self, name)
            if v is not None and np.shape(v) != shape:
                raise DimensionError(f"{name} has shape {np.shape(v)}, X has {shape}")

    @property
    def n(self):
        return self.x.shape[-2]

    @property
    def m(self):
        return self.x.shape[-1]

    @property
    def has_second(self):
        return self.dLL is not None and self.dLR is not None and self.dRR is not None

    def __getitem__(self, idx):
        """Select a sub-batch; ``jet[i, j]`` picks one node of a grid of jets."""
        def pick(v):
            return None if v is None else v[idx]
        return FieldJet(self.x[idx], self.dL[idx], self.dR[idx],
                        pick(self.dLL), pick(self.dLR), pick(self.dRR))

    def parity(self):
        """Jet of the parity-swapped field X(xi_R, xi_L)."""
        return FieldJet(self.x, self.dR, self.dL, self.dRR, self.dLR, self.dLL)

    def constraint_defects(self):
        """Norms of X^dagger X - 1 and of its first (and second) derivatives."""
        x, xh = self.x, dag(self.x)
        out = {"value": stiefel_defect(x)}
        for d in ("dL", "dR"):
            v = getattr(self, d)
            out[d] = fro(dag(v) @ x + xh @ v)
        if self.has_second:
            xl, xr = self.dL, self.dR
            out["dLL"] = fro(dag(self.dLL) @ x + 2 * dag(xl) @ xl + xh @ self.dLL)
            out["dRR"] = fro(dag(self.dRR) @ x + 2 * dag(xr) @ xr + xh @ self.dRR)
            out["dLR"] = fro(dag(self.dLR) @ x + dag(xl) @ xr + dag(xr) @ xl + xh @ self.dLR)
        return out

    def check(self, tol=STIEFEL_TOL):
        """Raise :class:`ConstraintError` if any differentiated constraint fails."""
        check_stiefel(self.x, tol)
        for name, err in self.constraint_defects().items():
            worst = np.max(err)
            if not np.isfinite(worst) or worst > tol:
                raise ConstraintError(f"constraint defect in {name}: {worst:.3e}")
        return self


def _need_second(jet, *names):
    for name in names:
        if getattr(jet, name) is None:
            raise MissingDerivativeError(f"jet has no {name} derivative")


def projector(x):
    """``P = 1 - X X^dagger``, the orthogonal projector onto the complement of span X."""
    x = check_stiefel(x)
    return np.eye(x.shape[-2]) - x @ dag(x)


def _proj(x):
    # unchecked projector for internal use on already-validated data
    return np.eye(x.shape[-2]) - x @ dag(x)


def projector_derivatives(jet):
    """Light-cone derivatives of P expanded through X and its derivatives.

    Returns a dict with keys ``L``, ``R`` and, when available, ``LL``, ``LR``, ``RR``.
    """
    x, xl, xr = jet.x, jet.dL, jet.dR
    xh = dag(x)
    out = {
        "L": -(xl @ xh + x @ dag(xl)),
        "R": -(xr @ xh + x @ dag(xr)),
    }
    if jet.dLL is not None:
        out["LL"] = -(jet.dLL @ xh + 2 * xl @ dag(xl) + x @ dag(jet.dLL))
    if jet.dRR is not None:
        out["RR"] = -(jet.dRR @ xh + 2 * xr @ dag(xr) + x @ dag(jet.dRR))
    if jet.dLR is not None:
        out["LR"] = -(jet.dLR @ xh + xl @ dag(xr) + xr @ dag(xl) + x @ dag(jet.dLR))
    return out


def covariant_derivative(jet, direction):
    """``D X = dX - X X^dagger dX = P dX`` along ``direction`` in {'L', 'R'}."""
    d = {"L": jet.dL, "R": jet.dR}.get(direction)
    if d is None:
        raise MissingDerivativeError(f"no first derivative for direction {direction!r}")
    return _proj(jet.x) @ d


def lagrangian_density(jet):
    """``tr(d^mu X (d_mu X)^dagger P)`` evaluated in light-cone coordinates.

    With ``ds^2 = dxi_L dxi_R`` one has ``d^L = 2 d_R`` and ``d^R = 2 d_L``,
    so the density equals ``4 Re tr(d_L X d_R X^dagger P)``.
    """
    p = _proj(jet.x)
    t = trace(jet.dL @ dag(jet.dR) @ p)
    return 4.0 * t.real


def currents(jet):
    """Conserved densities ``J_L = tr(d_L X d_L X^dagger P)`` and ``J_R``."""
    p = _proj(jet.x)
    jl = trace(jet.dL @ dag(jet.dL) @ p).real
    jr = trace(jet.dR @ dag(jet.dR) @ p).real
    return jl, jr


def el_commutator(jet):
    """The matrix ``[d_L d_R P, P]`` whose vanishing is the field equation."""
    _need_second(jet, "dLR")
    dp = projector_derivatives(jet)
    return comm(dp["LR"], _proj(jet.x))


def el_residual(jet):
    """Frobenius norm of ``[d_L d_R P, P]``; zero exactly on solutions."""
    return fro(el_commutator(jet))


def conservation_residual(jet):
    """Frobenius norm of ``d_L M_R + d_R M_L`` with ``M_D = [d_D P, P]``.

    Algebraically ``d_L M_R + d_R M_L = 2 [d_L d_R P, P]``; the two are
    computed independently here.
    """
    _need_second(jet, "dLR")
    dp = projector_derivatives(jet)
    p = _proj(jet.x)
    dl_mr = comm(dp["LR"], p) + comm(dp["R"], dp["L"])
    dr_ml = comm(dp["LR"], p) + comm(dp["L"], dp["R"])
    return fro(dl_mr + dr_ml)


def el_residual_xform(jet, coupling=1.0):
    """Diagnostic residual of the field equation written for X itself.

    Returns ``|| P (d_L d_R X - c (d_L X X^dagger d_R X + d_R X X^dagger d_L X)) ||``.
    ``c = 1`` is the value for which the expression is covariant under local
    gauge transformations and vanishes on solutions; the projector residual
    :func:`el_residual` is the authoritative one.
    """
    _need_second(jet, "dLR")
    x, xl, xr = jet.x, jet.dL, jet.dR
    xh = dag(x)
    inner = jet.dLR - coupling * (xl @ xh @ xr + xr @ xh @ xl)
    return fro(_proj(x) @ inner)


def tangent_vectors(jet):
    """Tangent vectors ``Z_L = [d_L P, P]`` and ``Z_R = -[d_R P, P]`` in su(N)."""
    dp = projector_derivatives(jet)
    p = _proj(jet.x)
    return comm(dp["L"], p), -comm(dp["R"], p)


def gauge_transform(x, h):
    """Right action ``X -> X h`` of ``h`` in SU(m); leaves P unchanged."""
    x = check_stiefel(x)
    h = check_unitary(h, special=True)
    if h.shape[-1] != x.shape[-1]:
        raise DimensionError(f"h is {h.shape[-2:]}, X has m={x.shape[-1]}")
    return x @ h


def global_transform(g, x):
    """Left action ``X -> g X`` of ``g`` in SU(N)."""
    x = check_stiefel(x)
    g = check_unitary(g, special=True)
    if g.shape[-1] != x.shape[-2]:
        raise DimensionError(f"g is {g.shape[-2:]}, X has N={x.shape[-2]}")
    return g @ x


def transform_jet(jet, g=None, h=None):
    """Apply a constant global ``g`` and/or gauge ``h`` to every entry of a jet."""
    if g is not None:
        check_unitary(g, special=True)
    if h is not None:
        check_unitary(h, special=True)

    def act(v):
        if v is None:
            return None
        if g is not None:
            v = g @ v
        if h is not None:
            v = v @ h
        return v

    return FieldJet(act(jet.x), act(jet.dL), act(jet.dR),
                    act(jet.dLL), act(jet.dLR), act(jet.dRR))


def local_gauge_jet(jet, h, hL, hR, hLL=None, hLR=None, hRR=None):
    """Jet of ``X h`` for a position-dependent ``h`` given with its derivatives."""
    x = jet.x
    out = dict(
        x=x @ h,
        dL=jet.dL @ h + x @ hL,
        dR=jet.dR @ h + x @ hR,
    )
    if jet.has_second and hLL is not None:
        out["dLL"] = jet.dLL @ h + 2 * jet.dL @ hL + x @ hLL
        out["dRR"] = jet.dRR @ h + 2 * jet.dR @ hR + x @ hRR
        out["dLR"] = jet.dLR @ h + jet.dL @ hR + jet.dR @ hL + x @ hLR
    return FieldJet(**out)


__all__ = [
    "FieldJet", "StiefelFrame", "STIEFEL_TOL", "check_stiefel", "stiefel_defect", "retract",
    "projector", "projector_derivatives", "covariant_derivative",
    "lagrangian_density", "currents", "el_commutator", "el_residual",
    "conservation_residual", "el_residual_xform", "tangent_vectors",
    "gauge_transform", "global_transform", "transform_jet", "local_gauge_jet",
]
