"""Matrix primitives and the su(N) Lie algebra.

Elements of su(N) are stored as plain complex ``ndarray`` objects of shape
``(..., N, N)``; leading axes are batch axes and every function here
broadcasts over them.  The Euclidean structure on su(N) is

    (A, B) = -1/2 tr(A B),

under which the standard basis returned by :func:`standard_basis` is
orthonormal, giving the identification su(N) = R^(N^2 - 1).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import DimensionError, NotInAlgebraError, NotUnitaryError

#: relative tolerance for admitting a matrix as an element of su(N)
ALGEBRA_TOL = 1e-10
#: absolute tolerance on ||U^dagger U - 1|| for unitary arguments
UNITARY_TOL = 1e-10


def dag(a):
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def trace(a):
    return np.trace(a, axis1=-2, axis2=-1)


def comm(a, b):
    """Matrix commutator ``[a, b] = ab - ba``."""
    return a @ b - b @ a


def fro(a):
    """Frobenius norm over the last two axes."""
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1)))


def check_algebra(a, tol=ALGEBRA_TOL):
    """Return ``a`` as a complex array after checking it lies in su(N).

    Raises :class:`NotInAlgebraError` if ``a`` is not square, not
    anti-hermitian, or not traceless within ``tol`` relative to its norm.
    Inputs are never symmetrized.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise NotInAlgebraError(f"expected square matrices, got shape {a.shape}")
    scale = np.maximum(fro(a), 1.0)
    herm = fro(a + dag(a)) / scale
    tr = np.abs(trace(a)) / scale
    if np.any(herm > tol) or np.any(tr > tol):
        raise NotInAlgebraError(
            f"not in su(N): anti-hermiticity defect {np.max(herm):.3e}, "
            f"trace defect {np.max(tr):.3e}"
        )
    return a


def inner_product(a, b):
    """Scalar product ``-1/2 tr(a b)`` on su(N), broadcasting over batch axes."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-2:] != b.shape[-2:]:
        raise DimensionError(f"dimension mismatch: {a.shape[-2:]} vs {b.shape[-2:]}")
    # tr(ab) = sum_ij a_ij b_ji
    return -0.5 * np.einsum("...ij,...ji->...", a, b).real


def norm(a):
    return np.sqrt(np.maximum(inner_product(a, a), 0.0))


@dataclass(frozen=True)
class SuNBasis:
    """Orthonormal basis of su(N).

    Ordering is fixed: all ``A_jk`` (j < k, lexicographic), then all ``B_jk``
    in the same order, then ``C_1 .. C_{N-1}``.  Coordinate exports depend
    on this order.
    """

    n: int
    elements: np.ndarray  # (N^2 - 1, N, N)
    labels: tuple

    @property
    def dim(self):
        return self.n * self.n - 1

    def __len__(self):
        return self.dim

    def __getitem__(self, key):
        if isinstance(key, str):
            key = self.labels.index(key)
        return self.elements[key]

    def gram(self):
        e = self.elements
        return inner_product(e[:, None], e[None, :])


@lru_cache(maxsize=None)
def _basis(n):
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    elements = []
    labels = []
    for j, k in pairs:
        a = np.zeros((n, n), dtype=complex)
        a[j, k] = a[k, j] = 1j
        elements.append(a)
        labels.append(f"A{j + 1}{k + 1}")
    for j, k in pairs:
        b = np.zeros((n, n), dtype=complex)
        b[j, k] = 1.0
        b[k, j] = -1.0
        elements.append(b)
        labels.append(f"B{j + 1}{k + 1}")
    for p in range(1, n):
        d = np.zeros(n)
        d[:p] = 1.0
        d[p] = -p
        elements.append(1j * np.sqrt(2.0 / (p * (p + 1))) * np.diag(d))
        labels.append(f"C{p}")
    arr = np.array(elements)
    arr.setflags(write=False)
    return SuNBasis(n=n, elements=arr, labels=tuple(labels))


def standard_basis(n):
    """Orthonormal basis ``{A_jk, B_jk, C_p}`` of su(n).

    ``A_jk = i(E_jk + E_kj)``, ``B_jk = E_jk - E_kj`` and ``C_p`` is the
    normalized diagonal generator ``i sqrt(2/(p(p+1))) diag(1,..,1,-p,0,..)``.
    """
    n = int(n)
    if n < 2:
        raise DimensionError(f"su(N) needs N >= 2, got {n}")
    return _basis(n)


def _basis_for(a, basis):
    n = np.shape(a)[-1]
    if basis is None:
        return standard_basis(n)
    if basis.n != n:
        raise DimensionError(f"basis is for su({basis.n}), element is {n}x{n}")
    return basis


def to_coordinates(a, basis=None):
    """Coordinates of ``a`` in an orthonormal basis (default: standard)."""
    a = np.asarray(a)
    basis = _basis_for(a, basis)
    return -0.5 * np.einsum("...ij,kji->...k", a, basis.elements).real


def from_coordinates(c, basis):
    """Inverse of :func:`to_coordinates`."""
    if isinstance(basis, (int, np.integer)):
        basis = standard_basis(basis)
    c = np.asarray(c, dtype=float)
    if c.shape[-1] != basis.dim:
        raise DimensionError(f"expected {basis.dim} coordinates, got {c.shape[-1]}")
    return np.einsum("...k,kij->...ij", c, basis.elements)


def unitarity_defect(u):
    u = np.asarray(u)
    eye = np.eye(u.shape[-1])
    return fro(dag(u) @ u - eye)


def check_unitary(u, tol=UNITARY_TOL, special=False):
    u = np.asarray(u, dtype=complex)
    if u.ndim < 2 or u.shape[-1] != u.shape[-2]:
        raise NotUnitaryError(f"expected square matrices, got shape {u.shape}")
    err = np.max(unitarity_defect(u))
    if err > tol:
        raise NotUnitaryError(f"||U^dagger U - 1|| = {err:.3e} exceeds {tol:.1e}")
    if special:
        derr = np.max(np.abs(np.linalg.det(u) - 1.0))
        if derr > tol:
            raise NotUnitaryError(f"|det U - 1| = {derr:.3e} exceeds {tol:.1e}")
    return u


def conjugate_by(phi, a):
    """Adjoint action ``phi a phi^dagger`` of a unitary ``phi`` on su(N)."""
    phi = check_unitary(phi)
    a = np.asarray(a)
    if phi.shape[-1] != a.shape[-1]:
        raise DimensionError(f"phi is {phi.shape[-2:]}, a is {a.shape[-2:]}")
    return phi @ a @ dag(phi)


# -- random sampling (tests, initial data) ----------------------------------

def random_unitary(n, rng, size=()):
    """Haar-distributed U(n) matrices."""
    shape = tuple(np.atleast_1d(size)) if size != () else ()
    z = (rng.standard_normal(shape + (n, n)) + 1j * rng.standard_normal(shape + (n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def random_special_unitary(n, rng, size=()):
    u = random_unitary(n, rng, size)
    det = np.linalg.det(u)
    return u / (det ** (1.0 / n))[..., None, None]


def random_stiefel(n, m, rng, size=()):
    """Random N x m matrices with orthonormal columns."""
    return random_unitary(n, rng, size)[..., :, :m]


def random_algebra(n, rng, size=()):
    shape = tuple(np.atleast_1d(size)) if size != () else ()
    return from_coordinates(rng.standard_normal(shape + (n * n - 1,)), standard_basis(n))
