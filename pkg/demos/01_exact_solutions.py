# Exact solutions and their symmetries
#
# A point of the Grassmannian is stored as an N x m frame X with orthonormal
# columns.  Only the projector P = 1 - X X^dagger matters physically.

import numpy as np

from gsigma import StiefelFrame, projector
from gsigma.catalog import balanced_torus, direct_sum, parity, reparametrize, torus
from gsigma.field import currents, el_residual
from gsigma.geometry import induced_metric

rng = np.random.default_rng(0)

# ## The projector

x = StiefelFrame.random(4, 2, rng)
p = projector(x)
print("||P^2 - P|| =", np.linalg.norm(p @ p - p))
print("tr P =", np.trace(p).real)

# ## A balanced torus is a solution, an unbalanced one is not
#
# Field-equation residuals are evaluated from closed-form jets on a 17 x 17 patch.

t = np.linspace(-1, 1, 17)
L, R = np.meshgrid(t, t, indexing="ij")

good = balanced_torus(2.0, 0.0, 0.5, -1.0)
bad = torus((1.0, 0.0), (1.0, 0.0), amplitudes=(0.8**0.5, 0.2**0.5))
print("balanced torus residual:", el_residual(good.jet(L, R)).max())
print("unbalanced torus residual:", el_residual(bad.jet(L, R)).min())

jl, jr = currents(good.jet(L, R))
print("J_L =", jl.mean(), "(expected (2 - 0)^2 / 4 = 1)")

# A single torus has det G = 0: its surface degenerates to a line.
# Summing two tori gives a genuine (flat) surface in su(4).

plane = direct_sum(balanced_torus(1.0, 0.0, 0.0, 1.0), balanced_torus(0.5, 0.0, 2.0, 0.0))
print("det G of the direct sum:", induced_metric(plane.jet(L, R)).detG.mean(),
      "expected", (1.0 * 2.0 - 0.5 * -1.0) ** 2 / 16)

# ## Conformal reparametrization and parity
#
# Both maps send solutions to solutions; the currents pick up chain-rule factors.

alpha = (lambda s: s + 0.3 * np.sin(s), lambda s: 1 + 0.3 * np.cos(s), lambda s: -0.3 * np.sin(s))
beta = (lambda s: 2 * s, lambda s: 2 + 0 * s, lambda s: 0 * s)
moved = reparametrize(plane, alpha, beta)
print("reparametrized residual:", el_residual(moved.jet(L, R)).max())
jl_new, _ = currents(moved.jet(L, R))
jl_old, _ = currents(plane.jet(alpha[0](L), beta[0](R)))
print("J_L covariance error:", np.abs(jl_new - alpha[1](L) ** 2 * jl_old).max())

swapped = parity(plane)
print("parity residual:", el_residual(swapped.jet(L, R)).max())
