"""Waves on time-dependent intervals and boxes.

Geometry of moving box domains and null-cone frames, the Carleman weight,
a mapped leapfrog solver for the adjoint and controlled wave equations,
quadrature checks of the Carleman and observability inequalities, and
interior control by the duality method.
"""
from .errors import (BoundaryConditionViolation, CFLViolation, DomainError, EmptyRegion,
                     MovingWaveError, NoConvergence, NumericalFailure, ParseError,
                     UnstableBlowup, ValidationError)
from .geometry import (CellGrid, MovingDomain, ObservationFrame, build_region_masks,
                       check_admissibility, eval_null_frame, minkowski_normal)
from .hum import HUMContext, synthesize_control
from .kernels import BACKEND
from .weights import CarlemanParams, check_derivative_bound, zeta
from .wavesolver import CoefficientSet, GridSpec, SpacetimeField, solve_adjoint, solve_controlled

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BoundaryConditionViolation", "CFLViolation", "CarlemanParams", "CellGrid",
    "CoefficientSet", "DomainError", "EmptyRegion", "GridSpec", "HUMContext",
    "MovingDomain", "MovingWaveError", "NoConvergence", "NumericalFailure",
    "ObservationFrame", "ParseError", "SpacetimeField", "UnstableBlowup", "ValidationError",
    "build_region_masks", "check_admissibility", "check_derivative_bound",
    "eval_null_frame", "minkowski_normal", "solve_adjoint", "solve_controlled",
    "synthesize_control", "zeta",
]
