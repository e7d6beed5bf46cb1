"""
Time marching, stationary solves and the ergodic constant
"""

from .ergodic import (
    ErgodicResult,
    solve_stationary,
    profile_uniqueness_probe,
    two_route_constant,
    vanishing_discount,
)
from .evolution import EvolutionTrace, estimate_slope, evolve, evolve_ensemble, kappa_series, step

__all__ = [
    "ErgodicResult",
    "solve_stationary",
    "profile_uniqueness_probe",
    "two_route_constant",
    "vanishing_discount",
    "EvolutionTrace",
    "estimate_slope",
    "evolve",
    "evolve_ensemble",
    "kappa_series",
    "step",
]
