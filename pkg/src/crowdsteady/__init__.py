"""Radial stationary states and stability for two Keller-Segel type crowd models."""

from .models import Domain, Model, Params
from .constants import (
    ConstantSolution,
    FoldData,
    constant_dispersion,
    constant_for_mass,
    constant_solutions,
    fold_points,
    instability_interval,
)
from .shooting import (
    RadialProfile,
    ShootResult,
    build_periodic,
    find_shooting_roots,
    integrate_shoot,
    is_monotone,
    mass_of_profile,
)
from .continuation import Branch, BranchPoint, bifurcation_thresholds, trace_branch, turning_points
from .spectrum import SpectralBasis, StabilityReport, dynamical_spectrum

__all__ = [
    "Domain", "Model", "Params",
    "ConstantSolution", "FoldData", "constant_dispersion", "constant_for_mass",
    "constant_solutions", "fold_points", "instability_interval",
    "RadialProfile", "ShootResult", "build_periodic", "find_shooting_roots",
    "integrate_shoot", "is_monotone", "mass_of_profile",
    "Branch", "BranchPoint", "bifurcation_thresholds", "trace_branch", "turning_points",
    "SpectralBasis", "StabilityReport", "dynamical_spectrum",
]

__version__ = "0.1.0"
