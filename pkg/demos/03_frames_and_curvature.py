# Moving frames, curvature and the Gauss-Codazzi check
#
# Two tori in a direct sum span a flat plane in su(4).  Its 13 normals come
# from a Gram-Schmidt sweep plus the block-diagonal part of the algebra.

import numpy as np

from gsigma.catalog import flat_plane
from gsigma.convergence import coarse_view, study
from gsigma.frame import frame_field
from gsigma.geometry import analyze_geometry
from gsigma.goursat import goursat_solve, random_initial_data
from gsigma.grid import LightConeGrid, interior_mask

g = LightConeGrid.square(17, 1.0, (-0.5, -0.5))
plane = flat_plane().sample(g)
frames = frame_field(plane)
print("normals:", frames.bundle.count)
print("Gram defect:", np.abs(frames.bundle.gram() - np.eye(13)).max())
print("GCR on the plane:", np.nanmax(frames.gcr[interior_mask(g.shape, 2)]))

# The normal space of a plane is constant, so the normals can be frozen;
# then the Gauss-Weingarten matrices vanish outright.

frozen = frame_field(plane, normals="frozen")
print("max |U|, |V| with constant normals:", np.abs(frozen.gw.u).max(), np.abs(frozen.gw.v).max())

# A solved field is curved.  Intrinsic K (from the metric) and extrinsic K
# (Gauss equation) agree better and better as the grid is refined, and so
# does the Gauss-Codazzi compatibility of U and V.

left, right = random_initial_data(4, 2, seed=7, amplitude=0.25)
grids = [LightConeGrid.square(n, 1.0) for n in (33, 65, 129)]
fields = [goursat_solve(left, right, gr) for gr in grids]
geos = [analyze_geometry(f) for f in fields]
print(study("K discrepancy", grids, [np.abs(x.K - x.K_gauss) for x in geos]).format())

ffs = [frame_field(f) for f in fields]
mask = interior_mask(grids[0].shape, 2)
for f in ffs:
    mask &= coarse_view(f.valid, grids[0].shape)
print(study("GCR", grids, [f.gcr for f in ffs], mask=mask).format())
print("largest |H| on the fine grid:", np.nanmax(geos[-1].Hnorm))
