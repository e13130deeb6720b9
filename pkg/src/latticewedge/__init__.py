"""Exact lattice diffraction by a Dirichlet right angle.

The field is a Sommerfeld integral whose density is an algebraic function
on a threefold cover of the genus-one dispersion surface of the square
lattice.  A truncated-lattice direct solver is provided as a reference.
"""

from .basis import Basis, BPoint, algorithm1, algorithm2, build_basis
from .field import FieldResult, build_gamma, build_lambdas, field_grid, gamma_forms, sommerfeld_field
from .lattice import IncidentWave, LatticeField, WaveParams, dispersion, incident_params, plane_wave
from .oracle import TruncatedProblem, compare, direct_solve
from .surface import Periods, PointR, PointR3, Surface, branch_points
from .transformant import Transformant

__all__ = [
    "BPoint", "Basis", "FieldResult", "IncidentWave", "LatticeField", "Periods", "PointR", "PointR3",
    "Surface", "Transformant", "TruncatedProblem", "WaveParams", "algorithm1", "algorithm2",
    "branch_points", "build_basis", "build_gamma", "build_lambdas", "compare", "direct_solve",
    "dispersion", "field_grid", "gamma_forms", "incident_params", "plane_wave", "sommerfeld_field",
]
