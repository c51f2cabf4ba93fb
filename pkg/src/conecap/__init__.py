"""Capacity, inverse mean curvature flow and conformal mass in convex cones."""
from ._backend import BACKEND
from .capacity import (
    CapacityResult,
    ExteriorGrid,
    PotentialField,
    SolverError,
    capacity,
    capacity_estimates,
    pfs_lower_bound,
    pfs_radius_profile,
    solve_mixed_bvp,
)
from .cone import CapSector, ConeSpec, DomainError, cap_metrics, isoperimetric_bound, solid_angle
from .flow import FlowState, FlowTrace, monitors, run, step
from .mass import (
    ConformalFactorField,
    HalfSchwarzschild,
    PenroseReport,
    admissibility,
    conformal_curvatures,
    mass_flux,
    mass_from_expansion,
    mass_identity,
    penrose_check,
    schwarzschild_field,
)
from .surface import CurvatureError, RadialGraph, functionals, mean_curvature_field, umbilicity_residual

__all__ = [name for name in dir() if not name.startswith("_")]
