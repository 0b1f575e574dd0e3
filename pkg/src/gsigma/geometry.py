"""Induced metric, fundamental forms and curvatures of the immersed surface."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .algebra import comm, dag, inner_product, norm, trace
from .exceptions import DegenerateMetricError, MissingDerivativeError
from .field import _proj, currents, projector_derivatives, tangent_vectors
from .grid import d1

#: det G must exceed REGULARITY_REL * max(J_L J_R, 1)
REGULARITY_REL = 1e-10


@dataclass(frozen=True)
class MetricData:
    """Components of the induced metric ``G = [[J_L, G_LR], [G_LR, J_R]]``."""

    gLL: np.ndarray
    gLR: np.ndarray
    gRR: np.ndarray

    @property
    def detG(self):
        return self.gLL * self.gRR - self.gLR**2

    @property
    def matrix(self):
        return np.stack([np.stack([self.gLL, self.gLR], -1),
                         np.stack([self.gLR, self.gRR], -1)], -2)

    def threshold(self):
        return REGULARITY_REL * np.maximum(self.gLL * self.gRR, 1.0)

    def regular(self):
        return self.detG > self.threshold()

    def first_form(self, v):
        """``I(v, v)`` for direction vectors ``v = (dxi_L, dxi_R)``."""
        v = np.asarray(v, float)
        a, b = v[..., 0], v[..., 1]
        return self.gLL * a * a + 2 * self.gLR * a * b + self.gRR * b * b


def _cross_trace(jet):
    return trace(jet.dL @ dag(jet.dR) @ _proj(jet.x))


def induced_metric(jet):
    """Metric from X-traces: ``J_L``, ``J_R`` and ``G_LR = -Re tr(d_L X d_R X^dagger P)``."""
    jl, jr = currents(jet)
    return MetricData(jl, -_cross_trace(jet).real, jr)


def metric_from_tangents(zl, zr):
    """Same metric computed as inner products of the tangent vectors."""
    return MetricData(inner_product(zl, zl), inner_product(zl, zr), inner_product(zr, zr))


def first_fundamental_form(jet, v):
    """``(2 delta_BD - 1) tr(d_B X d_D X^dagger P) v_B v_D`` for ``v = (v_L, v_R)``."""
    p = _proj(jet.x)
    d = (jet.dL, jet.dR)
    v = np.asarray(v, float)
    total = 0.0
    for b in range(2):
        for c in range(2):
            sign = 1.0 if b == c else -1.0
            t = trace(d[b] @ dag(d[c]) @ p)
            total = total + sign * t * v[..., b] * v[..., c]
    return np.real(total)


def schwarz_chain(jet):
    """The three members of ``J_L J_R >= |tr(..)|^2 >= (Re tr(..))^2``."""
    jl, jr = currents(jet)
    t = _cross_trace(jet)
    return jl * jr, np.abs(t) ** 2, t.real**2


@dataclass(frozen=True)
class RegularityReport:
    regular: np.ndarray
    detG: np.ndarray
    threshold: np.ndarray
    imaginary_cross: np.ndarray   # Im tr(d_L X d_R X^dagger P)
    imaginary_nonzero: np.ndarray
    min_singular: np.ndarray      # of the stacked (d_L X, d_R X, X)
    independent: np.ndarray

    @property
    def reason(self):
        if np.ndim(self.regular):
            return f"{int(np.sum(self.regular))}/{self.regular.size} nodes regular"
        if self.regular:
            return f"regular: det G = {float(self.detG):.3e}"
        return f"degenerate: det G = {float(self.detG):.3e} <= {float(self.threshold):.3e}"

    def __bool__(self):
        return bool(np.all(self.regular))


def regularity_test(jet, tol=1e-10):
    """Classify points as regular (det G above threshold) or degenerate.

    Also reports the two sufficient conditions for a non-degenerate first
    fundamental form: a nonzero imaginary cross trace, and linear
    independence of ``d_L X``, ``d_R X``, ``X`` (smallest singular value of
    the matrix whose columns are the flattened three).
    """
    metric = induced_metric(jet)
    t = _cross_trace(jet)
    scale = np.sqrt(np.maximum(metric.gLL * metric.gRR, 0.0))
    flat = np.stack([v.reshape(v.shape[:-2] + (-1,)) for v in (jet.dL, jet.dR, jet.x)], -1)
    sv = np.linalg.svd(flat, compute_uv=False)[..., -1]
    return RegularityReport(
        regular=metric.regular(),
        detG=metric.detG,
        threshold=metric.threshold(),
        imaginary_cross=t.imag,
        imaginary_nonzero=np.abs(t.imag) > tol * np.maximum(scale, 1.0),
        min_singular=sv,
        independent=sv > np.sqrt(tol),
    )


def second_derivatives_Z(jet):
    """``(d_L d_L Z, d_L d_R Z, d_R d_R Z)`` from the jet of X.

    ``d_L d_L Z = [d_L d_L P, P]``, ``d_L d_R Z = [d_L P, d_R P]`` and
    ``d_R d_R Z = -[d_R d_R P, P]``.
    """
    if not jet.has_second:
        raise MissingDerivativeError("second derivatives of X are required")
    dp = projector_derivatives(jet)
    p = _proj(jet.x)
    return comm(dp["LL"], p), comm(dp["L"], dp["R"]), -comm(dp["RR"], p)


def mixed_derivatives_Z(jet):
    """True mixed derivatives ``(d_R Z_L, d_L Z_R)`` of the tangent field.

    ``d_R Z_L = [d_L d_R P, P] + [d_L P, d_R P]`` and
    ``d_L Z_R = -[d_L d_R P, P] + [d_L P, d_R P]``; both reduce to the
    commutator ``[d_L P, d_R P]`` exactly when the field equation holds, while
    the commutator alone is orthogonal to the tangents for any field.
    """
    if jet.dLR is None:
        raise MissingDerivativeError("the mixed derivative of X is required")
    dp = projector_derivatives(jet)
    p = _proj(jet.x)
    el = comm(dp["LR"], p)
    c = comm(dp["L"], dp["R"])
    return el + c, c - el


def _solve_gram(metric, b_l, b_r):
    """Solve ``G (a_L, a_R)^T = (b_L, b_R)^T`` node by node."""
    det = metric.detG
    a_l = (metric.gRR * b_l - metric.gLR * b_r) / det
    a_r = (metric.gLL * b_r - metric.gLR * b_l) / det
    return a_l, a_r


@dataclass(frozen=True)
class SecondOrderData:
    """Second derivatives of Z, their tangential coefficients and normal parts."""

    dLLZ: np.ndarray
    dLRZ: np.ndarray
    dRRZ: np.ndarray
    aLL: np.ndarray   # A^L_L
    aLR: np.ndarray   # A^L_R
    aRL: np.ndarray   # A^R_L
    aRR: np.ndarray   # A^R_R
    IILL: np.ndarray
    IILR: np.ndarray
    IIRR: np.ndarray
    H: np.ndarray
    metric: MetricData
    regular: np.ndarray

    @property
    def Hnorm(self):
        return norm(self.H)

    def gauss_curvature(self):
        """``K = ((II_LL, II_RR) - (II_LR, II_LR)) / det G`` (Gauss equation)."""
        num = inner_product(self.IILL, self.IIRR) - inner_product(self.IILR, self.IILR)
        return num / self.metric.detG


def fundamental_form_II_and_H(jet, metric: Optional[MetricData] = None, strict=True):
    """Second fundamental form and mean curvature vector.

    Tangential coefficients come from the 2x2 Gram system; the normal parts
    are obtained by subtraction, ``II_LR = d_L d_R Z`` and
    ``H = (J_R II_LL - 2 G_LR II_LR + J_L II_RR) / det G``.

    With ``strict`` a degenerate point raises :class:`DegenerateMetricError`;
    otherwise degenerate nodes of a batch are filled with NaN.
    """
    zl, zr = tangent_vectors(jet)
    if metric is None:
        metric = metric_from_tangents(zl, zr)
    regular = metric.regular()
    if strict and not np.all(regular):
        raise DegenerateMetricError(f"det G = {np.min(metric.detG):.3e} below regularity threshold")
    zll, zlr, zrr = second_derivatives_Z(jet)
    with np.errstate(divide="ignore", invalid="ignore"):
        aLL, aLR = _solve_gram(metric, inner_product(zll, zl), inner_product(zll, zr))
        aRL, aRR = _solve_gram(metric, inner_product(zrr, zl), inner_product(zrr, zr))
        ex = (..., None, None)
        ii_ll = zll - aLL[ex] * zl - aLR[ex] * zr
        ii_rr = zrr - aRL[ex] * zl - aRR[ex] * zr
        ii_lr = zlr
        h = (metric.gRR[ex] * ii_ll - 2 * metric.gLR[ex] * ii_lr
             + metric.gLL[ex] * ii_rr) / metric.detG[ex]
    if not strict:
        bad = ~regular
        aLL, aLR, aRL, aRR = (np.where(bad, np.nan, a) for a in (aLL, aLR, aRL, aRR))
        ii_ll = np.where(bad[ex], np.nan, ii_ll)
        ii_rr = np.where(bad[ex], np.nan, ii_rr)
        h = np.where(bad[ex], np.nan, h)
    return SecondOrderData(zll, zlr, zrr, aLL, aLR, aRL, aRR, ii_ll, ii_lr, ii_rr, h,
                           metric, regular)


def erode(mask, radius=1):
    """Nodes whose whole ``(2r+1)^2`` neighbourhood lies inside ``mask``; edges excluded."""
    out = np.zeros_like(mask, dtype=bool)
    nL, nR = mask.shape
    r = radius
    if nL <= 2 * r or nR <= 2 * r:
        return out
    core = np.ones((nL - 2 * r, nR - 2 * r), dtype=bool)
    for di in range(-r, r + 1):
        for dj in range(-r, r + 1):
            core &= mask[r + di: nL - r + di, r + dj: nR - r + dj]
    out[r:-r, r:-r] = core
    return out


def gaussian_curvature(metric, grid, regular=None):
    """Gaussian curvature from the metric field by finite differences.

    Uses ``K = 1/sqrt(det G) d_R[(d_L G_LR - G_LR d_L ln(J_L) / 2) / sqrt(det G)]``,
    valid for metrics with ``d_R J_L = d_L J_R = 0`` (true on solutions).
    Boundary nodes, and nodes with a degenerate metric anywhere in their
    stencil, get NaN.
    """
    if regular is None:
        regular = metric.regular() & (metric.gLL > metric.threshold())
    ok = erode(regular, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.sqrt(np.where(regular, metric.detG, np.nan))
        log_jl = np.log(np.where(regular, metric.gLL, np.nan))
        t = (d1(metric.gLR, grid.hL, 0) - 0.5 * metric.gLR * d1(log_jl, grid.hL, 0)) / s
        k = d1(t, grid.hR, 1) / s
    return np.where(ok, k, np.nan)


@dataclass(frozen=True)
class GeometryField:
    """Per-node geometry of a sampled surface."""

    grid: object
    metric: MetricData
    second: SecondOrderData
    K: np.ndarray          # from the metric formula
    K_gauss: np.ndarray    # from the Gauss equation
    regular: np.ndarray

    @property
    def Hnorm(self):
        return self.second.Hnorm

    def rows(self):
        """Rows for the per-node geometry CSV."""
        L, R = self.grid.mesh()
        m = self.metric
        cols = [L, R, m.gLL, m.gRR, m.gLR, m.detG, self.K, self.Hnorm, self.regular.astype(int)]
        return np.stack([np.asarray(c, float) for c in cols], -1).reshape(-1, len(cols))

    CSV_HEADER = ("xi_L", "xi_R", "J_L", "J_R", "G_LR", "detG", "K", "H_norm", "regular")


def analyze_geometry(gfield, exact=True):
    """Metric, II, H and both curvature estimates at every node of a field."""
    jets = gfield.jets(exact=exact)
    metric = induced_metric(jets)
    second = fundamental_form_II_and_H(jets, metric, strict=False)
    regular = second.regular
    K = gaussian_curvature(metric, gfield.grid, regular)
    with np.errstate(divide="ignore", invalid="ignore"):
        Kg = np.where(regular, second.gauss_curvature(), np.nan)
    return GeometryField(gfield.grid, metric, second, K, Kg, regular)
