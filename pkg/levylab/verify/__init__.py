"""
Runnable verdicts: reachability and covering, comparison, identities, acceptance suite
"""

from .harness import (
    Verdict,
    bernstein_identity_check,
    comparison_harness,
    kappa_monotonicity_check,
    sup_bound_check,
)
from .reachability import ReachableSet, covering_check, reachable_set
from .suite import acceptance_suite, verdicts_frame

__all__ = [
    "Verdict",
    "bernstein_identity_check",
    "comparison_harness",
    "kappa_monotonicity_check",
    "sup_bound_check",
    "ReachableSet",
    "covering_check",
    "reachable_set",
    "acceptance_suite",
    "verdicts_frame",
]
