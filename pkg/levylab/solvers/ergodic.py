"""
Stationary discounted problems, the vanishing-discount sweep and the
two-route ergodic constant
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import statsmodels.api as sm
import structlog

from ..core.config import Settings, get_settings
from ..core.errors import ConfigurationError, InvariantViolation, NonConvergenceError, UsageError
from ..core.monitoring import DiagnosticsLog, record
from ..numerics.grid import GridFunction, TorusGrid, metrics, upwind_gradients
from ..numerics.local import SchemeOperators, gradient_extent
from ..problem.models import default_schedule
from ..problem.spec import ProblemSpec
from .evolution import STATIONARY, EvolutionTrace, estimate_slope, evolve, evolve_ensemble, matching_operators

logger = structlog.get_logger(__name__)

RICHARDSON_POINTS = 4


@dataclass(frozen=True)
class StationaryResult:
    solution: GridFunction
    residual: float
    steps: int
    history: List[float] = field(default_factory=list)


def solve_stationary(spec: ProblemSpec, u_init: GridFunction, tol: Optional[float] = None,
                     max_steps: Optional[int] = None, operators: Optional[SchemeOperators] = None,
                     anchor_index: int = 0, settings: Optional[Settings] = None,
                     diagnostics: Optional[DiagnosticsLog] = None, **operator_options: Any) -> StationaryResult:
    """Pseudo-time marching of lambda u - Tr(A D^2 u) - I u + H(x, Du) = 0

    With level projection on, u = v + s where v is anchored at zero and the
    level s = midrange(rate(v)) / lambda is solved exactly each step; only
    the profile v is marched. The returned residual is sup |rate(u)| of the
    assembled solution.
    """
    settings = settings or get_settings()
    tol = tol if tol is not None else settings.stationary_tolerance
    max_steps = max_steps if max_steps is not None else settings.stationary_max_steps
    lam = spec.discount
    if lam <= 0:
        raise ConfigurationError("stationary solve needs a positive discount", discount=lam)
    if tol <= 0:
        raise ConfigurationError("stationary tolerance must be positive", tol=tol)
    grid = u_init.grid
    if not 0 <= anchor_index < grid.size:
        raise UsageError("anchor index outside the grid", anchor_index=anchor_index, size=grid.size)

    values = np.array(u_init.values, dtype=float)
    if operators is None:
        operators = SchemeOperators.build(spec, grid, gradient_extent(upwind_gradients(values, grid)),
                                          settings=settings, diagnostics=diagnostics, **operator_options)
    else:
        operators = matching_operators(spec, operators)

    project = settings.level_projection
    if project:
        values = values - values[anchor_index]
    dt = operators.timestep()
    history: List[float] = []
    residual = np.inf
    converged = False
    k = 0
    for k in range(1, max_steps + 1):
        gradients = upwind_gradients(values, grid)
        extent = gradient_extent(gradients)
        refreshed = operators.ensure_coverage(extent)
        if k % settings.theta_refresh_every == 0 and not refreshed:
            refreshed = operators.params.refresh(spec, extent)
        if refreshed:
            dt = operators.timestep()

        rate = operators.rate(values, gradients)
        if project:
            middle = 0.5 * (rate.max() + rate.min())
            rate = rate - middle
        residual = float(np.abs(rate).max())
        if k % settings.residual_check_every == 0:
            history.append(residual)
        if residual <= tol:
            converged = True
            break
        values = values + dt * rate
        if project:
            values = values - values[anchor_index]

    if project:
        level = 0.5 * (operators.rate(values).max() + operators.rate(values).min()) / lam
        values = values + level
    solution = u_init.with_values(values)
    residual = float(np.abs(operators.rate(values)).max())

    if not converged:
        logger.warning("Stationary solve did not converge", lam=lam, steps=k, residual=residual)
        raise NonConvergenceError("stationary solve exhausted its step budget", residual=residual,
                                  history=history, lam=lam, steps=k)
    logger.info("Stationary solve converged", lam=lam, steps=k, residual=residual)
    record(diagnostics, "ergodic", "stationary_converged", lam=lam, steps=k, residual=residual,
           dt=dt, theta_max=operators.params.theta_max)
    return StationaryResult(solution, residual, k, history)


@dataclass
class ErgodicResult:
    """Vanishing-discount records, the constant by both routes, and the profile"""
    c_discount: float
    profile: GridFunction
    lambda_schedule: List[float]
    records: pd.DataFrame
    fit_residual: float
    anchor_index: int = 0
    c_slope: Optional[float] = None
    slope_residual: Optional[float] = None
    convergence_defects: Dict[float, float] = field(default_factory=dict)
    trace: Optional[EvolutionTrace] = None
    final_state: Optional[GridFunction] = None

    @property
    def agreement_gap(self) -> Optional[float]:
        if self.c_slope is None:
            return None
        return abs(self.c_discount - self.c_slope)

    def summary_frame(self) -> pd.DataFrame:
        row: Dict[str, Any] = {
            "c_discount": self.c_discount,
            "c_slope": self.c_slope if self.c_slope is not None else np.nan,
            "agreement_gap": self.agreement_gap if self.c_slope is not None else np.nan,
            "fit_residual": self.fit_residual,
            "anchor_index": self.anchor_index,
        }
        for t, defect in sorted(self.convergence_defects.items()):
            row[f"defect_T{t:g}"] = defect
        return pd.DataFrame([row])


def richardson_constant(lambdas: Sequence[float], scaled: Sequence[float]) -> tuple:
    """Intercept of the linear fit of lambda u_lambda(x0) against lambda, and the fit residual"""
    lam = np.asarray(lambdas, dtype=float)[-RICHARDSON_POINTS:]
    y = np.asarray(scaled, dtype=float)[-RICHARDSON_POINTS:]
    if len(lam) == 1:
        return float(y[0]), 0.0
    fit = sm.OLS(y, sm.add_constant(lam, has_constant="add")).fit()
    return float(fit.params[0]), float(np.abs(fit.resid).max())


def vanishing_discount(spec: ProblemSpec, schedule: Optional[Sequence[float]] = None,
                       tol: Optional[float] = None, grid: Optional[TorusGrid] = None,
                       points_per_axis: int = 128, anchor_index: int = 0,
                       operators: Optional[SchemeOperators] = None, max_steps: Optional[int] = None,
                       settings: Optional[Settings] = None, diagnostics: Optional[DiagnosticsLog] = None,
                       **operator_options: Any) -> ErgodicResult:
    """Warm-started stationary solves along a decreasing lambda schedule"""
    settings = settings or get_settings()
    schedule = list(schedule) if schedule is not None else default_schedule()
    if not schedule or any(lam <= 0 for lam in schedule) or any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise ConfigurationError("lambda schedule must be positive and strictly decreasing", schedule=schedule)
    grid = grid or (operators.grid if operators is not None else TorusGrid(spec.dimension, points_per_axis))
    if operators is None:
        operators = SchemeOperators.build(spec.with_discount(schedule[0]), grid, settings=settings,
                                          diagnostics=diagnostics, **operator_options)

    result_tol = tol if tol is not None else settings.stationary_tolerance
    H_0 = spec.hamiltonian.rest_bound(grid.points)
    current = GridFunction.constant(grid, 0.0)
    rows: List[Dict[str, Any]] = []
    for lam in schedule:
        try:
            result = solve_stationary(spec.with_discount(lam), current, tol, max_steps,
                                      operators.with_discount(lam), anchor_index, settings, diagnostics)
        except NonConvergenceError as exc:
            exc.partial = pd.DataFrame(rows)
            raise
        u = result.solution
        fm = metrics(u)
        rows.append({
            "lam": lam,
            "sup_norm": fm.sup_norm,
            "osc": fm.osc,
            "lipschitz": fm.lipschitz,
            "lam_u_anchor": lam * float(u.values[anchor_index]),
            "residual": result.residual,
            "steps": result.steps,
        })
        bound = H_0 / lam + 10.0 * result_tol
        if fm.sup_norm > bound:
            raise InvariantViolation("sup bound violated during the discount sweep", lam=lam,
                                     sup_norm=fm.sup_norm, bound=bound)
        current = u

    records = pd.DataFrame(rows)
    c_discount, fit_residual = richardson_constant(records["lam"], records["lam_u_anchor"])
    profile = current.normalized(anchor_index)
    logger.info("Vanishing discount sweep finished", c_discount=c_discount, fit_residual=fit_residual,
                lam_min=schedule[-1])
    record(diagnostics, "ergodic", "sweep_finished", c_discount=c_discount, fit_residual=fit_residual,
           points=len(schedule))
    return ErgodicResult(c_discount, profile, schedule, records, fit_residual, anchor_index)


def convergence_defect(state: np.ndarray, profile: GridFunction) -> float:
    """min over constants k of sup |u - w - k|, i.e. osc(u - w) / 2"""
    gap = np.asarray(state) - profile.values
    return float(gap.max() - gap.min()) / 2.0


def two_route_constant(spec: ProblemSpec, T_final: float = 50.0, schedule: Optional[Sequence[float]] = None,
                       grid: Optional[TorusGrid] = None, points_per_axis: int = 128,
                       checkpoints: Sequence[float] = (10.0, 25.0, 50.0), tol: Optional[float] = None,
                       sample_every: int = 10, anchor_index: int = 0,
                       settings: Optional[Settings] = None, diagnostics: Optional[DiagnosticsLog] = None,
                       **operator_options: Any) -> ErgodicResult:
    """Ergodic constant by discount limit and by long-time growth rate"""
    settings = settings or get_settings()
    grid = grid or TorusGrid(spec.dimension, points_per_axis)
    result = vanishing_discount(spec, schedule, tol, grid, anchor_index=anchor_index, settings=settings,
                                diagnostics=diagnostics, **operator_options)

    stops = sorted({float(c) for c in checkpoints if 0.0 < c <= T_final} | {float(T_final)})
    final, trace = evolve(spec.with_discount(0.0), GridFunction.constant(grid, 0.0), T_final, sample_every,
                          checkpoints=stops, settings=settings, diagnostics=diagnostics, **operator_options)

    window = trace.window
    if trace.status == STATIONARY:
        window = max(2, min(window, len(trace) // 2))
    slope = estimate_slope(trace, window)

    result.c_slope = slope.slope
    result.slope_residual = slope.residual
    result.trace = trace
    result.final_state = final
    result.convergence_defects = {t: convergence_defect(trace.checkpoint_states[t], result.profile) for t in stops}
    logger.info("Two-route constant", c_discount=result.c_discount, c_slope=result.c_slope,
                gap=result.agreement_gap, status=trace.status)
    record(diagnostics, "ergodic", "two_route", c_discount=result.c_discount, c_slope=result.c_slope,
           gap=result.agreement_gap, evolution_status=trace.status)
    return result


@dataclass(frozen=True)
class ProbeResult:
    distance: float
    informational: bool
    profiles: List[GridFunction]
    reason: str = ""


def profile_uniqueness_probe(spec: ProblemSpec, perturbations: Sequence[GridFunction], T_final: float = 50.0,
                             covering_passed: Optional[bool] = None, anchor_index: int = 0,
                             sample_every: int = 10, settings: Optional[Settings] = None,
                             diagnostics: Optional[DiagnosticsLog] = None, **operator_options: Any) -> ProbeResult:
    """Max pairwise sup-distance of anchored long-time profiles

    The probe only asserts when the covering condition holds and H is
    locally Lipschitz in p (exponent >= 2); otherwise it is informational.
    """
    if len(perturbations) < 2:
        raise UsageError("profile probe needs at least two initial data")
    grid = perturbations[0].grid
    if covering_passed is None:
        from ..verify.reachability import covering_check
        covering_passed = covering_check(spec, grid, r0=0.1).passed

    reasons = []
    if not covering_passed:
        reasons.append("covering condition fails")
    if spec.hamiltonian.exponent < 2.0:
        reasons.append("H not locally Lipschitz in p at p = 0")

    finals, _ = evolve_ensemble(spec, list(perturbations), T_final, sample_every, settings=settings,
                                diagnostics=diagnostics, **operator_options)
    profiles = [u.normalized(anchor_index) for u in finals]
    distance = max(float(np.abs(a.values - b.values).max()) for a, b in combinations(profiles, 2))
    informational = bool(reasons)
    record(diagnostics, "ergodic", "uniqueness_probe", distance=distance, informational=informational,
           reason="; ".join(reasons))
    return ProbeResult(distance, informational, profiles, "; ".join(reasons))
