"""
Runnable verdicts for the comparison principle, the exponential identity,
the sup bound and the monotonicity of kappa
"""

import json
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from ..core.config import Settings, get_settings
from ..core.errors import UsageError
from ..core.monitoring import DiagnosticsLog, record
from ..numerics.grid import GridFunction, TorusGrid
from ..numerics.levy import apply_Ij_values, apply_Jj_values
from ..numerics.local import SchemeOperators
from ..problem.spec import ProblemSpec
from ..solvers.ergodic import solve_stationary
from ..solvers.evolution import evolve_ensemble, kappa_series

logger = structlog.get_logger(__name__)


class Verdict(BaseModel):
    """Outcome of one named check"""

    model_config = ConfigDict(frozen=True)

    name: str
    instance: str
    passed: bool
    informational: bool = False
    witness: Dict[str, Any] = Field(default_factory=dict)
    max_defect: float = 0.0

    def to_row(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "instance": self.instance,
            "passed": self.passed,
            "informational": self.informational,
            "witness": json.dumps(self.witness, sort_keys=True, default=float),
            "max_defect": self.max_defect,
        }

    def summary(self) -> str:
        status = "PASS" if self.passed else ("INFO" if self.informational else "FAIL")
        return f"{status} {self.name} [{self.instance}] max_defect={self.max_defect:.3e}"


def _pair_members(pairs: Sequence[Tuple[GridFunction, GridFunction]], tolerance: float) -> List[GridFunction]:
    members: List[GridFunction] = []
    for k, (lower, upper) in enumerate(pairs):
        if np.any(lower.values > upper.values + tolerance):
            raise UsageError("initial pair is not ordered", pair=k)
        members.extend([lower, upper])
    return members


def comparison_harness(spec: ProblemSpec, pairs: Sequence[Tuple[GridFunction, GridFunction]], T_final: float,
                       sample_every: int = 10, settings: Optional[Settings] = None,
                       diagnostics: Optional[DiagnosticsLog] = None, **operator_options: Any) -> Verdict:
    """Evolve ordered pairs with a shared step sequence and measure ordering violations

    For lambda = 0 every member is also checked against the Perron barriers
    min u0 - H_0 t and max u0 + H_0 t, with H_0 from Hamiltonian.rest_bound.
    """
    settings = settings or get_settings()
    tol = settings.ordering_tolerance
    members = _pair_members(pairs, tol)
    grid = members[0].grid
    _, traces = evolve_ensemble(spec, members, T_final, sample_every, keep_snapshots=True, early_stop=False,
                                settings=settings, diagnostics=diagnostics, **operator_options)

    violation = 0.0
    witness: Dict[str, Any] = {}
    for k in range(len(pairs)):
        lower, upper = traces[2 * k], traces[2 * k + 1]
        for t, u, w in zip(lower.times, lower.snapshots, upper.snapshots):
            gap = float(np.max(u - w))
            if gap > violation:
                violation = gap
                witness = {"pair": k, "t": float(t), "index": int(np.argmax(u - w))}

    barrier_gap = 0.0
    if spec.discount == 0.0:
        H_0 = spec.hamiltonian.rest_bound(grid.points)
        for member, trace in zip(members, traces):
            low, high = member.values.min(), member.values.max()
            for t, u in zip(trace.times, trace.snapshots):
                below = (low - H_0 * t) - u.min()
                above = u.max() - (high + H_0 * t)
                barrier_gap = max(barrier_gap, float(below), float(above))
        if barrier_gap > tol and not witness:
            witness = {"barrier_gap": barrier_gap}

    defect = max(violation, barrier_gap)
    passed = defect <= tol
    record(diagnostics, "verify", "comparison", pairs=len(pairs), violation=violation, barrier_gap=barrier_gap)
    logger.info("Comparison harness", pairs=len(pairs), violation=violation, barrier_gap=barrier_gap)
    return Verdict(name="comparison", instance=spec.name, passed=passed, witness=witness, max_defect=defect)


def bernstein_defects(spec: ProblemSpec, v: GridFunction, operators: SchemeOperators) -> Tuple[float, float]:
    """Relative defects of the full exponential identity and of its nonlocal part

    Left side: lambda u - Tr(A D^2 u) - I u + H(x, Du) at u = e^v. Right side:
    e^v [lambda + e^-v H(x, e^v Dv) - Tr(A D^2 v) - Dv.A Dv - J v], using
    centered gradients on both sides.
    """
    grid = v.grid
    values = v.values
    u = np.exp(values)
    x = grid.points
    lam = spec.discount

    def centered(w):
        return 0.5 * (grid.forward_differences(w) + grid.backward_differences(w))

    lhs = lam * u - operators.diffusion.apply(u) + spec.hamiltonian(x, centered(u))
    dv = centered(values)
    quadratic = np.einsum("ni,nij,nj->n", dv, spec.diffusion.covariance(x), dv)
    rhs_bracket = (lam + np.exp(-values) * spec.hamiltonian(x, u[:, None] * dv)
                   - operators.diffusion.apply(values) - quadratic)

    nonlocal_defect = 0.0
    if operators.table is not None:
        linear = apply_Ij_values(operators.table, u)
        exponential = apply_Jj_values(operators.table, values)
        lhs = lhs - linear
        rhs_bracket = rhs_bracket - exponential
        nonlocal_defect = float(np.abs(linear - u * exponential).max() / max(np.abs(linear).max(), 1e-300))
    rhs = u * rhs_bracket
    full = float(np.abs(lhs - rhs).max() / max(np.abs(lhs).max(), 1.0))
    return full, nonlocal_defect


def bernstein_identity_check(spec: ProblemSpec, v_samples: Sequence[GridFunction],
                             operators: Optional[SchemeOperators] = None, threshold: float = 2e-2,
                             settings: Optional[Settings] = None,
                             diagnostics: Optional[DiagnosticsLog] = None, **operator_options: Any) -> Verdict:
    """Max relative defect of the exponential change of variables over samples"""
    if not v_samples:
        raise UsageError("bernstein check needs at least one sample")
    grid = v_samples[0].grid
    operators = operators or SchemeOperators.build(spec, grid, settings=settings, diagnostics=diagnostics,
                                                   **operator_options)
    worst, worst_nonlocal, worst_index = 0.0, 0.0, 0
    for k, v in enumerate(v_samples):
        osc = float(v.values.max() - v.values.min())
        if osc > 1.0:
            logger.warning("Bernstein sample outside the conditioning range", sample=k, osc=osc)
        full, nonlocal_defect = bernstein_defects(spec, v, operators)
        worst_nonlocal = max(worst_nonlocal, nonlocal_defect)
        if full > worst:
            worst, worst_index = full, k
    record(diagnostics, "verify", "bernstein", defect=worst, nonlocal_defect=worst_nonlocal)
    return Verdict(name="bernstein_identity", instance=spec.name, passed=worst <= threshold,
                   witness={"sample": worst_index, "nonlocal_defect": worst_nonlocal}, max_defect=worst)


def sup_bound_check(spec: ProblemSpec, grid: TorusGrid, tol: Optional[float] = None,
                    u_init: Optional[GridFunction] = None, settings: Optional[Settings] = None,
                    diagnostics: Optional[DiagnosticsLog] = None, **operator_options: Any) -> Verdict:
    """||u_lambda||_inf <= H_0 / lambda + 10 tol"""
    settings = settings or get_settings()
    tol = tol if tol is not None else settings.stationary_tolerance
    u_init = u_init or GridFunction.constant(grid, 0.0)
    result = solve_stationary(spec, u_init, tol, settings=settings, diagnostics=diagnostics, **operator_options)
    bound = spec.hamiltonian.rest_bound(grid.points) / spec.discount + 10.0 * tol
    sup = float(np.abs(result.solution.values).max())
    return Verdict(name="sup_bound", instance=f"{spec.name}@lam={spec.discount:g}", passed=sup <= bound,
                   witness={"sup_norm": sup, "bound": bound, "residual": result.residual},
                   max_defect=max(0.0, sup - bound))


def kappa_monotonicity_check(spec: ProblemSpec, pairs: Sequence[Tuple[GridFunction, GridFunction]],
                             T_final: float, sample_every: int = 10, settings: Optional[Settings] = None,
                             diagnostics: Optional[DiagnosticsLog] = None, **operator_options: Any) -> Verdict:
    """kappa(t) = max(u - v) must never increase along ordered pairs"""
    settings = settings or get_settings()
    members = [m for pair in pairs for m in (pair[1], pair[0])]
    _, traces = evolve_ensemble(spec, members, T_final, sample_every, keep_snapshots=True, early_stop=False,
                                settings=settings, diagnostics=diagnostics, **operator_options)
    worst, worst_pair, violations = 0.0, 0, 0
    for k in range(len(pairs)):
        series = kappa_series(traces[2 * k], traces[2 * k + 1], settings.kappa_tolerance)
        violations += series.violations
        if series.max_increase > worst:
            worst, worst_pair = series.max_increase, k
    record(diagnostics, "verify", "kappa", pairs=len(pairs), max_increase=worst, violations=violations)
    return Verdict(name="kappa_monotone", instance=spec.name, passed=violations == 0,
                   witness={"pair": worst_pair, "violations": violations}, max_defect=worst)
