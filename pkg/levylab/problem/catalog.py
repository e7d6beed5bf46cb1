"""
Named problem instances used by the acceptance suite and the examples
"""

from typing import Any, Dict, List

from ..core.errors import ConfigurationError
from .models import ProblemConfig
from .presets import PRESETS
from .spec import ProblemSpec, build_problem


def preset_names() -> List[str]:
    return sorted(PRESETS)


def preset_config(name: str, **overrides: Any) -> ProblemConfig:
    """ProblemConfig for a preset, with nested overrides merged in"""
    if name not in PRESETS:
        raise ConfigurationError(f"Unknown preset '{name}'", available=preset_names())
    return ProblemConfig.model_validate({"preset": name, **overrides})


def problem(name: str, **overrides: Any) -> ProblemSpec:
    """Build a catalog instance, e.g. problem("mixed", discount=0.1)"""
    return build_problem(preset_config(name, **overrides))


def eikonal(**overrides: Any) -> ProblemSpec:
    """|p|^2 - cos(2 pi x), a = 0.1(1 + cos^2), fractional order 1, j = z"""
    return problem("eikonal", **overrides)


def mixed(exponent: float = 3.0, **overrides: Any) -> ProblemSpec:
    """|p|^m - cos(2 pi x), a = 0.1(1 + cos^2), fractional order 1/2"""
    hamiltonian: Dict[str, Any] = dict(overrides.pop("hamiltonian", {}))
    hamiltonian["exponent"] = exponent
    return problem("mixed", hamiltonian=hamiltonian, **overrides)


def first_order_eikonal(**overrides: Any) -> ProblemSpec:
    return problem("first_order_eikonal", **overrides)


def constant_source(f0: float = 0.5, **overrides: Any) -> ProblemSpec:
    """f = f0 everywhere; u = f0 t and u = f0 / lambda are exact"""
    hamiltonian: Dict[str, Any] = dict(overrides.pop("hamiltonian", {}))
    hamiltonian["f"] = {"family": "constant", "offset": f0}
    return problem("constant", hamiltonian=hamiltonian, **overrides)


def atomic_degenerate(**overrides: Any) -> ProblemSpec:
    """sigma = 0 with a single atom at z = 1/4"""
    return problem("atomic_degenerate", **overrides)
