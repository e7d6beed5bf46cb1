"""
Problem instances, experiment schema and structural-assumption checkers
"""

from .assumptions import (
    CheckReport,
    check_diffusion,
    check_H1,
    check_H2prime,
    check_levy,
    coercivity_gap,
    run_all_checks,
)
from .models import ExperimentConfig, ProblemConfig, load_experiment, parse_experiment
from .spec import (
    DiffusionFactor,
    Hamiltonian,
    LevyData,
    PeriodicField,
    ProblemSpec,
    build_problem,
    custom_hamiltonian,
)

__all__ = [
    "CheckReport",
    "check_diffusion",
    "check_H1",
    "check_H2prime",
    "check_levy",
    "coercivity_gap",
    "run_all_checks",
    "ExperimentConfig",
    "ProblemConfig",
    "load_experiment",
    "parse_experiment",
    "DiffusionFactor",
    "Hamiltonian",
    "LevyData",
    "PeriodicField",
    "ProblemSpec",
    "build_problem",
    "custom_hamiltonian",
]
