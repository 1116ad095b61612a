"""Numerical laboratory for degenerate-weight mixed boundary value problems.

Submodules
----------
weights    scalar/matrix degenerate weights, Muckenhoupt constant estimates
geometry   boxes, uniform grids, Dirichlet/Neumann partitions, Cantor sets
assembly   quadrature, weighted norms, weighted stiffness/mass operators
capacity   weighted variational capacity and its scaling/classification
poincare   capacity-scaled Sobolev-Poincare constants and density checks
solver     the mixed-boundary weighted p-Laplace solve (measure/multiplier)
meyers     higher-integrability scans, Caccioppoli and reverse-Holder probes
cli        config-driven experiment runner with CSV/JSON outputs
"""

from . import errors
from .geometry import (Box, Grid, BoundaryPartition, NodeSet, build_grid,
                       cantor_intervals, cantor_dimension, interior_set,
                       mark_dirichlet, unit_square)
from .weights import (ApEstimate, MatrixWeight, ScalarWeight,
                      ap_constant_estimate, check_strong_doubling, eval_matrix,
                      eval_weight, weighted_measure)
from .assembly import (DiscreteField, VectorField, assemble_weighted_mass,
                       assemble_weighted_stiffness, gradient_at_quadpoints,
                       weighted_integral, weighted_norm)

__all__ = [
    "errors", "Box", "Grid", "BoundaryPartition", "NodeSet", "build_grid",
    "cantor_intervals", "cantor_dimension", "interior_set", "mark_dirichlet",
    "unit_square", "ApEstimate", "MatrixWeight", "ScalarWeight",
    "ap_constant_estimate", "check_strong_doubling", "eval_matrix",
    "eval_weight", "weighted_measure", "DiscreteField", "VectorField",
    "assemble_weighted_mass", "assemble_weighted_stiffness",
    "gradient_at_quadpoints", "weighted_integral", "weighted_norm",
]

__version__ = "0.1.0"
