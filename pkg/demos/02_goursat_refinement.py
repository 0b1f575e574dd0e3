# Solving the field equation from light-cone data
#
# Random smooth data on the two characteristics xi_R = 0 and xi_L = 0 fix a
# unique solution.  We march it on three nested grids and watch the
# discretization errors fall like h^2.

import numpy as np

from gsigma.convergence import study
from gsigma.experiment import conservation_defect
from gsigma.goursat import goursat_solve, random_initial_data
from gsigma.grid import LightConeGrid
from gsigma.immersion import loop_closedness_residual, weierstrass_integrate

left, right = random_initial_data(3, 1, seed=5, amplitude=0.1)
grids = [LightConeGrid.square(n, 1.0) for n in (33, 65, 129)]
fields = [goursat_solve(left, right, g) for g in grids]

# The currents J_L, J_R are conserved (d_R J_L = d_L J_R = 0) on exact solutions.
# Here their finite-difference derivatives shrink with the grid.

table = study("conservation", grids, [conservation_defect(f) for f in fields])
print(table.format())

# The tangent 1-form Z_L dxi_L + Z_R dxi_R is closed on solutions, so its
# circulation around each cell vanishes in the limit.

circ = [np.pad(loop_closedness_residual(f, reduce=None), ((0, 1), (0, 1)),
               constant_values=np.nan) for f in fields]
print(study("closedness", grids, circ, margin=0).format())

# Integrating the form gives the surface in su(3); two integration paths
# differ only by the enclosed circulations.

fine = fields[-1]
a = weierstrass_integrate(fine, path="row_first")
b = weierstrass_integrate(fine, path="column_first")
print("path difference:", np.abs(a.z - b.z).max())
print("surface nodes (first three coordinates) at the far corner:", a.coords[-1, -1, :3])
