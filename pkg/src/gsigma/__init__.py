"""Grassmannian sigma models on light-cone grids and their surfaces in su(N)."""
from .algebra import inner_product, norm, standard_basis, to_coordinates, from_coordinates
from .catalog import (balanced_torus, chiral_wave, constant_solution, direct_sum,
                      exponential_curve, flat_plane, parity, reparametrize, torus, transformed)
from .convergence import ConvergenceTable, study
from .exceptions import *  # noqa: F401,F403
from .field import FieldJet, StiefelFrame, el_residual, projector, tangent_vectors
from .frame import build_normals, complete_to_group, frame_at, frame_field, projector_normal
from .geometry import analyze_geometry, fundamental_form_II_and_H, induced_metric
from .goursat import goursat_solve, random_initial_data
from .grid import GridField, LightConeGrid
from .immersion import loop_closedness_residual, weierstrass_integrate

__version__ = "0.1.0"

__all__ = [
    "inner_product",
    "norm",
    "standard_basis",
    "to_coordinates",
    "from_coordinates",
    "balanced_torus",
    "chiral_wave",
    "constant_solution",
    "direct_sum",
    "exponential_curve",
    "flat_plane",
    "parity",
    "reparametrize",
    "torus",
    "transformed",
    "ConvergenceTable",
    "study",
    "FieldJet",
    "StiefelFrame",
    "el_residual",
    "projector",
    "tangent_vectors",
    "build_normals",
    "complete_to_group",
    "frame_at",
    "frame_field",
    "projector_normal",
    "analyze_geometry",
    "fundamental_form_II_and_H",
    "induced_metric",
    "goursat_solve",
    "random_initial_data",
    "GridField",
    "LightConeGrid",
    "loop_closedness_residual",
    "weierstrass_integrate",
    "BlockStructureError",
    "CertificationError",
    "ConfigError",
    "ConstraintError",
    "DegenerateMetricError",
    "DimensionError",
    "GSigmaError",
    "GridError",
    "MissingDerivativeError",
    "NotInAlgebraError",
    "NotUnitaryError",
    "SolverError",
]
