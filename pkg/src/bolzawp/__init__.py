"""Harmonic maps from a deformed Bolza surface and the variation of their energy."""

from .hypgeom import (
    Mobius, mobius_apply, mobius_derivative, hyperbolic_distance,
    density_phi, disk_exp, disk_log,
)
from .fuchsian import SurfaceGroup, GroupBall, bolza_group, enumerate_ball, reduce_to_domain
from .mesh import QuotientMesh, build_mesh
from .quaddiff import QuadraticDifferential, BeltramiDifferential, poincare_series, basis, wp_gram
from .deformation import Chart, ConformalStructure, structure_at
from .curvature import Hyperbolic, FlatTorus
from .harmonic import MapField, energy, solve_torus, solve_hyperbolic, harmonic_residual, identity_map
from .variation import EnergySurvey, LeviForm, levi_form

__version__ = "0.1.0"
