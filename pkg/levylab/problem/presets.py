"""
Named problem presets as plain configuration documents
"""

from typing import Any, Dict

_COSINE_SOURCE: Dict[str, Any] = {"family": "cosine", "offset": 0.0, "amplitude": 1.0}
_SQUARED_COSINE_DIFFUSION: Dict[str, Any] = {"family": "squared_cosine", "scale": 0.1}

PRESETS: Dict[str, Dict[str, Any]] = {
    "eikonal": {
        "name": "eikonal",
        "dimension": 1,
        "discount": 0.0,
        "diffusion": dict(_SQUARED_COSINE_DIFFUSION),
        "hamiltonian": {"family": "power_coercive", "exponent": 2.0, "f": dict(_COSINE_SOURCE),
                        "b_m": 1.0, "K": 1.0},
        "levy": {"family": "fractional", "order": 1.0},
        "jump": {"family": "translation"},
        "initial": {"family": "constant", "offset": 0.0},
    },
    "mixed": {
        "name": "mixed",
        "dimension": 1,
        "discount": 0.0,
        "diffusion": dict(_SQUARED_COSINE_DIFFUSION),
        "hamiltonian": {"family": "power_coercive", "exponent": 3.0, "f": dict(_COSINE_SOURCE)},
        "levy": {"family": "fractional", "order": 0.5},
        "jump": {"family": "translation"},
        "initial": {"family": "constant", "offset": 0.0},
    },
    "first_order_eikonal": {
        "name": "first_order_eikonal",
        "dimension": 1,
        "discount": 0.0,
        "diffusion": {"family": "zero"},
        "hamiltonian": {"family": "power_coercive", "exponent": 2.0, "f": dict(_COSINE_SOURCE)},
        "levy": {"family": "none"},
        "jump": {"family": "translation"},
        "initial": {"family": "constant", "offset": 0.0},
    },
    "constant": {
        "name": "constant",
        "dimension": 1,
        "discount": 0.0,
        "diffusion": dict(_SQUARED_COSINE_DIFFUSION),
        "hamiltonian": {"family": "power_coercive", "exponent": 2.0,
                        "f": {"family": "constant", "offset": 0.5}},
        "levy": {"family": "fractional", "order": 1.0},
        "jump": {"family": "translation"},
        "initial": {"family": "constant", "offset": 0.0},
    },
    "atomic_degenerate": {
        "name": "atomic_degenerate",
        "dimension": 1,
        "discount": 0.0,
        "diffusion": {"family": "zero"},
        "hamiltonian": {"family": "power_coercive", "exponent": 2.0, "f": dict(_COSINE_SOURCE)},
        "levy": {"family": "atomic", "atoms": [{"z": [0.25], "mass": 1.0}]},
        "jump": {"family": "translation"},
        "initial": {"family": "constant", "offset": 0.0},
    },
}


def deep_merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively overlay overrides on base; lists and scalars replace"""
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged
