"""
Discrete operators on the torus: grid calculus, Levy-Ito quadrature, monotone local scheme
"""

from .grid import FieldMetrics, GridFunction, TorusGrid, UpwindGradients, metrics, upwind_gradients
from .levy import (
    QuadratureTable,
    apply_Ij,
    apply_Jj,
    build_table,
    fractional_multiplier,
    fractional_reference,
    small_jump_defect,
)
from .local import (
    SchemeOperators,
    SchemeParams,
    apply_diffusion,
    explicit_rate,
    numerical_hamiltonian,
    stable_timestep,
)

__all__ = [
    "FieldMetrics",
    "GridFunction",
    "TorusGrid",
    "UpwindGradients",
    "metrics",
    "upwind_gradients",
    "QuadratureTable",
    "apply_Ij",
    "apply_Jj",
    "build_table",
    "fractional_multiplier",
    "fractional_reference",
    "small_jump_defect",
    "SchemeOperators",
    "SchemeParams",
    "apply_diffusion",
    "explicit_rate",
    "numerical_hamiltonian",
    "stable_timestep",
]
