"""Exact solutions of the field equation with closed-form derivatives.

Every solution returned by the public constructors here is certified on a
17 x 17 sample grid before it is handed out: nothing is trusted by
construction.  :func:`torus` is deliberately uncertified so that it can
serve as a negative control (it only solves the equation for balanced
amplitudes).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import check_unitary, dag
from .exceptions import CertificationError, DimensionError, MissingDerivativeError
from .field import FieldJet, check_stiefel, el_residual, transform_jet
from .grid import GridField, LightConeGrid

CERTIFY_TOL = 1e-10
CERTIFY_NODES = 17
CERTIFY_BOX = (-1.0, 1.0)


@dataclass(frozen=True)
class AnalyticSolution:
    """A field ``(xi_L, xi_R) -> FieldJet`` with exact derivatives.

    ``evaluator`` must broadcast over array arguments, returning jets with
    the broadcast shape as leading batch axes.
    """

    n: int
    m: int
    evaluator: Callable
    name: str = "analytic"
    certified: bool = False

    def jet(self, xiL, xiR):
        xiL, xiR = np.broadcast_arrays(np.asarray(xiL, float), np.asarray(xiR, float))
        return self.evaluator(xiL, xiR)

    def sample(self, grid):
        """Sample on a grid; the resulting field keeps the exact jets."""
        L, R = grid.mesh()
        jets = self.jet(L, R)
        return GridField(grid, jets.x, provenance="analytic", exact_jets=jets,
                         meta={"solution": self.name})

    def max_residual(self, box=CERTIFY_BOX, nodes=CERTIFY_NODES):
        lo, hi = box
        grid = LightConeGrid.square(nodes, hi - lo, (lo, lo))
        L, R = grid.mesh()
        return float(np.max(el_residual(self.jet(L, R))))

    def certify(self, tol=CERTIFY_TOL, box=CERTIFY_BOX, nodes=CERTIFY_NODES):
        """Return a certified copy, or raise :class:`CertificationError`."""
        lo, hi = box
        grid = LightConeGrid.square(nodes, hi - lo, (lo, lo))
        L, R = grid.mesh()
        jets = self.jet(L, R)
        jets.check()
        res = float(np.max(el_residual(jets)))
        if not res <= tol:
            raise CertificationError(f"{self.name}: EL residual {res:.3e} exceeds {tol:.1e}")
        return AnalyticSolution(self.n, self.m, self.evaluator, self.name, certified=True)


def _zeros_like_batch(shape, n, m):
    return np.zeros(shape + (n, m), dtype=complex)


def constant_solution(x0):
    """The constant map ``X = x0``; all derivatives vanish."""
    x0 = check_stiefel(x0)
    n, m = x0.shape

    def evaluate(xiL, xiR):
        z = _zeros_like_batch(xiL.shape, n, m)
        return FieldJet(np.broadcast_to(x0, z.shape).copy(), z, z.copy(), z.copy(), z.copy(), z.copy())

    return AnalyticSolution(n, m, evaluate, "constant").certify()


def chiral_wave(f, df=None, d2f=None, n=None, m=None):
    """Left-moving field ``X = f(xi_L)``.

    ``f`` and its derivative ``df`` (and optionally ``d2f``) are vectorized
    callables of ``xi_L`` returning ``(..., N, m)`` arrays.  Without ``d2f``
    the jets carry no ``dLL`` and second-order geometry is unavailable.
    """
    if df is None:
        raise MissingDerivativeError("chiral_wave needs the derivative of the curve")
    x_probe = check_stiefel(f(np.zeros(())))
    n, m = x_probe.shape

    def evaluate(xiL, xiR):
        x = f(xiL)
        z = np.zeros_like(x)
        return FieldJet(x, df(xiL), z, None if d2f is None else d2f(xiL), z.copy(), z.copy())

    return AnalyticSolution(n, m, evaluate, "chiral_wave").certify()


def exponential_curve(x0, generator):
    """Curve ``t -> exp(t K) x0`` with ``K`` anti-hermitian, plus two derivatives.

    Returns the triple ``(f, df, d2f)`` accepted by :func:`chiral_wave`.
    """
    x0 = check_stiefel(x0)
    k = np.asarray(generator, dtype=complex)
    if k.shape != (x0.shape[0],) * 2:
        raise DimensionError("generator must be N x N")
    if np.max(np.abs(k + dag(k))) > 1e-12:
        raise ValueError("generator must be anti-hermitian")
    w, v = np.linalg.eigh(-1j * k)  # K = i V diag(w) V^dagger
    base = dag(v) @ x0

    def along(t, power):
        t = np.asarray(t, float)[..., None]
        phase = np.exp(1j * w * t) * (1j * w) ** power
        return v @ (phase[..., :, None] * base)

    return (lambda t: along(t, 0)), (lambda t: along(t, 1)), (lambda t: along(t, 2))


def torus(a, b, amplitudes=(2**-0.5, 2**-0.5)):
    """Uncertified N=2, m=1 family ``X = (c1 e^{i th1}, c2 e^{i th2})``.

    ``th_k = a_k xi_L + b_k xi_R``.  Solves the field equation only when
    ``|c1| = |c2|``; use :func:`balanced_torus` for the certified member.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    c = np.asarray(amplitudes, float)
    if a.shape != (2,) or b.shape != (2,) or c.shape != (2,):
        raise DimensionError("torus takes two-component a, b and amplitudes")
    if abs(np.sum(c**2) - 1.0) > 1e-12:
        raise ValueError("amplitudes must satisfy c1^2 + c2^2 = 1")

    def evaluate(xiL, xiR):
        theta = a * xiL[..., None] + b * xiR[..., None]
        x = (c * np.exp(1j * theta))[..., None]
        al, bl = a[:, None], b[:, None]
        return FieldJet(x, 1j * al * x, 1j * bl * x,
                        -(al**2) * x, -(al * bl) * x, -(bl**2) * x)

    return AnalyticSolution(2, 1, evaluate, "torus")


def balanced_torus(a1, a2, b1, b2):
    """``X = (e^{i(a1 xi_L + b1 xi_R)}, e^{i(a2 xi_L + b2 xi_R)})^T / sqrt(2)``.

    Closed forms: ``J_L = (a1-a2)^2/4``, ``J_R = (b1-b2)^2/4``,
    ``G_LR = -(a1-a2)(b1-b2)/4``, ``det G = 0``.
    """
    sol = torus((a1, a2), (b1, b2))
    return AnalyticSolution(2, 1, sol.evaluator, "balanced_torus").certify()


def direct_sum(s1, s2):
    """Block-diagonal field ``diag(X1, X2)`` in G(m1+m2, n1+n2)."""
    n, m = s1.n + s2.n, s1.m + s2.m

    def block(u, v):
        if u is None or v is None:
            return None
        out = np.zeros(u.shape[:-2] + (n, m), dtype=complex)
        out[..., : s1.n, : s1.m] = u
        out[..., s1.n:, s1.m:] = v
        return out

    def evaluate(xiL, xiR):
        j1, j2 = s1.jet(xiL, xiR), s2.jet(xiL, xiR)
        return FieldJet(*(block(getattr(j1, k), getattr(j2, k))
                          for k in ("x", "dL", "dR", "dLL", "dLR", "dRR")))

    return AnalyticSolution(n, m, evaluate, f"direct_sum({s1.name},{s2.name})").certify()


def flat_plane(da=2.0, db=0.0, da2=0.0, db2=2.0):
    """Direct sum of two balanced tori in G(2,2) inside su(4).

    Its surface is an affine plane with ``det G = (da db2 - da2 db)^2 / 16``.
    """
    t1 = balanced_torus(da, 0.0, db, 0.0)
    t2 = balanced_torus(da2, 0.0, db2, 0.0)
    return direct_sum(t1, t2)


def reparametrize(sol, alpha, beta):
    """Conformal change ``xi_L -> alpha(xi_L)``, ``xi_R -> beta(xi_R)``.

    ``alpha`` and ``beta`` are triples ``(map, first derivative, second
    derivative)`` of vectorized callables.
    """
    a, da, dda = alpha
    b, db, ddb = beta

    def evaluate(xiL, xiR):
        j = sol.jet(a(xiL), b(xiR))
        al = da(xiL)[..., None, None]
        bl = db(xiR)[..., None, None]
        all_ = dda(xiL)[..., None, None]
        bll = ddb(xiR)[..., None, None]
        second = j.dLL is not None and j.dRR is not None
        return FieldJet(
            j.x, al * j.dL, bl * j.dR,
            all_ * j.dL + al**2 * j.dLL if second else None,
            al * bl * j.dLR,
            bll * j.dR + bl**2 * j.dRR if second else None,
        )

    return AnalyticSolution(sol.n, sol.m, evaluate, f"conformal({sol.name})").certify()


def parity(sol):
    """Parity-swapped solution ``X(xi_R, xi_L)``."""
    def evaluate(xiL, xiR):
        return sol.jet(xiR, xiL).parity()

    return AnalyticSolution(sol.n, sol.m, evaluate, f"parity({sol.name})").certify()


def transformed(sol, g=None, h=None):
    """Constant global ``X -> g X`` and/or gauge ``X -> X h`` transform of a solution."""
    if g is not None:
        g = check_unitary(g, special=True)
    if h is not None:
        h = check_unitary(h, special=True)

    def evaluate(xiL, xiR):
        return transform_jet(sol.jet(xiL, xiR), g=g, h=h)

    return AnalyticSolution(sol.n, sol.m, evaluate, f"transformed({sol.name})").certify()


CATALOG = {
    "constant": constant_solution,
    "chiral_wave": chiral_wave,
    "balanced_torus": balanced_torus,
    "direct_sum": direct_sum,
    "flat_plane": flat_plane,
}
