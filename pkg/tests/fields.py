"""Cached refinement studies shared by several test modules."""
from functools import lru_cache

from gsigma.frame import frame_field
from gsigma.goursat import goursat_solve, random_initial_data
from gsigma.grid import LightConeGrid

NODES = (33, 65, 129)
CASES = {
    "N3m1": dict(n=3, m=1, seed=5, amplitude=0.1),
    "N4m2": dict(n=4, m=2, seed=7, amplitude=0.25),
}


@lru_cache(maxsize=None)
def solved(case, nodes):
    c = CASES[case]
    left, right = random_initial_data(c["n"], c["m"], c["seed"], amplitude=c["amplitude"])
    return goursat_solve(left, right, LightConeGrid.square(nodes, 1.0))


@lru_cache(maxsize=None)
def frames(case, nodes, seed=None):
    return frame_field(solved(case, nodes), seed=seed)
