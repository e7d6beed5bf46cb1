"""
Explicit time marching of the parabolic problem and its trajectory metrics
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import statsmodels.api as sm
import structlog

from ..core.config import Settings, get_settings
from ..core.errors import BlowUpError, ConfigurationError, UsageError
from ..core.monitoring import DiagnosticsLog, record
from ..numerics.grid import GridFunction, metrics_of, upwind_gradients
from ..numerics.local import SchemeOperators, gradient_extent
from ..problem.spec import ProblemSpec

logger = structlog.get_logger(__name__)

TRACE_COLUMNS = ["t", "osc", "sup_norm", "lip_space", "lip_time", "slope", "residual", "mean"]

RUNNING = "running"
COMPLETED = "completed"
STATIONARY = "converged_modulo_constant"


@dataclass
class EvolutionTrace:
    """Sampled metrics of one evolution

    residual is the drift-compensated increment sup|du - mean(du)| of the
    step ending at the sample; lip_time is max|du|/dt over that step.
    """
    window: int = 50
    records: Dict[str, List[float]] = field(default_factory=lambda: {c: [] for c in TRACE_COLUMNS})
    snapshots: List[np.ndarray] = field(default_factory=list)
    checkpoint_states: Dict[float, np.ndarray] = field(default_factory=dict)
    status: str = RUNNING
    steps: int = 0
    stop_time: Optional[float] = None
    lip_time_max: float = 0.0

    def __len__(self) -> int:
        return len(self.records["t"])

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.records["t"])

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.records[name])

    def running_slope(self) -> float:
        """Least-squares slope of mean(u) over the trailing window"""
        if len(self) < 2:
            return 0.0
        t = self.times[-self.window:]
        m = self.column("mean")[-self.window:]
        return float(np.polyfit(t, m, 1)[0])

    def append(self, t: float, values: np.ndarray, grid, lip_time: float, residual: float,
               keep_snapshot: bool = False) -> None:
        fm = metrics_of(values, grid)
        self.records["t"].append(float(t))
        self.records["osc"].append(fm.osc)
        self.records["sup_norm"].append(fm.sup_norm)
        self.records["lip_space"].append(fm.lipschitz)
        self.records["lip_time"].append(float(lip_time))
        self.records["mean"].append(grid.mean(values))
        self.records["residual"].append(float(residual))
        self.records["slope"].append(self.running_slope())
        if keep_snapshot:
            self.snapshots.append(values.copy())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({c: self.records[c] for c in TRACE_COLUMNS})


def matching_operators(spec: ProblemSpec, operators: SchemeOperators) -> SchemeOperators:
    """operators rebuilt for spec's discount; any other disagreement is a caller error"""
    built = operators.spec
    if built is spec:
        return operators
    differing = [name for name in ("dimension", "diffusion", "hamiltonian", "levy")
                 if getattr(built, name) is not getattr(spec, name) and getattr(built, name) != getattr(spec, name)]
    if differing:
        raise UsageError("operators were built for a different problem", problem=spec.name,
                         operators_problem=built.name, differing=differing)
    if built.discount != spec.discount:
        return operators.with_discount(spec.discount)
    return operators


def step(state: GridFunction, spec: ProblemSpec, operators: SchemeOperators, dt: float,
         step_index: int = 0) -> GridFunction:
    """u + dt * [diffusion + nonlocal - H_hat - lambda u]"""
    operators = matching_operators(spec, operators)
    values = state.values + dt * operators.rate(state.values)
    if not np.all(np.isfinite(values)):
        raise BlowUpError("non-finite state during time marching", step=step_index)
    return state.with_values(values)


def _stops(T_final: float, checkpoints: Sequence[float]) -> List[float]:
    return sorted({float(c) for c in checkpoints if 0.0 < c < T_final} | {float(T_final)})


def evolve_ensemble(spec: ProblemSpec, initial_states: Sequence[GridFunction], T_final: float,
                    sample_every: int = 10, operators: Optional[SchemeOperators] = None,
                    checkpoints: Sequence[float] = (), keep_snapshots: bool = False,
                    early_stop: bool = True, settings: Optional[Settings] = None,
                    diagnostics: Optional[DiagnosticsLog] = None,
                    **operator_options: Any) -> Tuple[List[GridFunction], List[EvolutionTrace]]:
    """March several initial data with one shared theta and dt sequence

    Steps are clipped to land on every checkpoint and on T_final. The run
    stops early once every member's profile is stationary, i.e. the
    drift-compensated increment stays below the tolerance for the configured
    number of consecutive samples.
    """
    settings = settings or get_settings()
    if T_final <= 0:
        raise ConfigurationError("T_final must be positive", T_final=T_final)
    if not initial_states:
        raise UsageError("evolve_ensemble needs at least one initial state")
    grid = initial_states[0].grid
    for state in initial_states:
        if state.grid != grid:
            raise UsageError("ensemble members live on different grids")

    states = [np.array(s.values, dtype=float) for s in initial_states]
    extent = max(gradient_extent(upwind_gradients(v, grid)) for v in states)
    if operators is None:
        operators = SchemeOperators.build(spec, grid, gradient_bound=extent, settings=settings,
                                          diagnostics=diagnostics, **operator_options)
    else:
        operators = matching_operators(spec, operators)

    traces = [EvolutionTrace(window=settings.trace_window) for _ in states]
    for trace, values in zip(traces, states):
        trace.append(0.0, values, grid, 0.0, 0.0, keep_snapshots)

    stops = _stops(T_final, checkpoints)
    stop_index = 0
    dt_stable = operators.timestep()
    record(diagnostics, "evolution", "start", members=len(states), T_final=T_final, **operators.describe())
    logger.info("Evolution started", members=len(states), T_final=T_final, dt=dt_stable,
                theta_max=operators.params.theta_max)

    t = 0.0
    n = 0
    quiet_samples = 0
    status = COMPLETED
    while stop_index < len(stops):
        gradients = [upwind_gradients(v, grid) for v in states]
        extent = max(gradient_extent(g) for g in gradients)
        refreshed = operators.ensure_coverage(extent)
        if n and n % settings.theta_refresh_every == 0 and not refreshed:
            refreshed = operators.params.refresh(spec, extent)
        if refreshed:
            dt_stable = operators.timestep()

        target = stops[stop_index]
        dt = dt_stable
        landing = t + dt >= target * (1.0 - 1e-14)
        if landing:
            dt = target - t

        increments = []
        for k, (values, grads) in enumerate(zip(states, gradients)):
            new = values + dt * operators.rate(values, grads)
            if not np.all(np.isfinite(new)):
                raise BlowUpError("non-finite state during time marching", step=n + 1, member=k, t=t)
            increments.append(new - values)
            states[k] = new
        n += 1
        t = target if landing else t + dt

        sampled = landing or n % sample_every == 0
        if sampled:
            quiet = True
            for trace, values, du in zip(traces, states, increments):
                drift_free = float(np.abs(du - grid.mean(du)).max())
                lip_time = float(np.abs(du).max() / dt) if dt > 0 else 0.0
                trace.lip_time_max = max(trace.lip_time_max, lip_time)
                trace.append(t, values, grid, lip_time, drift_free, keep_snapshots)
                quiet = quiet and drift_free < settings.stationarity_tolerance
            quiet_samples = quiet_samples + 1 if quiet else 0

        if landing:
            for trace, values in zip(traces, states):
                trace.checkpoint_states[target] = values.copy()
            stop_index += 1

        if early_stop and quiet_samples >= settings.stationarity_samples and stop_index < len(stops):
            status = STATIONARY
            for trace, values in zip(traces, states):
                for pending in stops[stop_index:]:
                    trace.checkpoint_states[pending] = values.copy()
            break

    for trace in traces:
        trace.status = status
        trace.steps = n
        trace.stop_time = t
    logger.info("Evolution finished", status=status, steps=n, t=t, theta_max=operators.params.theta_max)
    record(diagnostics, "evolution", "finish", status=status, steps=n, t=t,
           theta_max=operators.params.theta_max, theta_refreshes=operators.params.refreshes)
    finals = [initial_states[0].with_values(v) for v in states]
    return finals, traces


def evolve(spec: ProblemSpec, u0: GridFunction, T_final: float, sample_every: int = 10,
           **options: Any) -> Tuple[GridFunction, EvolutionTrace]:
    """Single-member evolution"""
    finals, traces = evolve_ensemble(spec, [u0], T_final, sample_every, **options)
    return finals[0], traces[0]


def initial_rate_bound(operators: SchemeOperators, u0: GridFunction) -> float:
    """sup |rate(u0)|: the time-Lipschitz constant the first step exhibits"""
    return float(np.abs(operators.rate(u0.values)).max())


@dataclass(frozen=True)
class KappaSeries:
    times: np.ndarray
    kappa: np.ndarray
    max_increase: float
    tolerance: float

    @property
    def violations(self) -> int:
        return int(np.count_nonzero(np.diff(self.kappa) > self.tolerance))

    @property
    def passed(self) -> bool:
        return self.violations == 0


def kappa_series(trace_u: EvolutionTrace, trace_v: EvolutionTrace, tolerance: Optional[float] = None) -> KappaSeries:
    """kappa(t_k) = max (u - v)(t_k) along two evolutions sampled at the same times"""
    tolerance = tolerance if tolerance is not None else get_settings().kappa_tolerance
    if not trace_u.snapshots or not trace_v.snapshots:
        raise UsageError("kappa series needs traces recorded with keep_snapshots=True")
    if len(trace_u) != len(trace_v) or not np.array_equal(trace_u.times, trace_v.times):
        raise UsageError("traces are sampled at different times", samples_u=len(trace_u), samples_v=len(trace_v))
    kappa = np.array([float(np.max(u - v)) for u, v in zip(trace_u.snapshots, trace_v.snapshots)])
    increases = np.diff(kappa)
    return KappaSeries(trace_u.times, kappa, float(increases.max(initial=0.0)), tolerance)


@dataclass(frozen=True)
class SlopeEstimate:
    slope: float
    intercept: float
    residual: float
    samples: int


def estimate_slope(trace: EvolutionTrace, window: Optional[int] = None) -> SlopeEstimate:
    """OLS slope of mean(u) against t over the trailing window

    The growth rate is the ergodic constant: u(., t) - c t converges.
    """
    window = window or trace.window
    if len(trace) < 2 * window:
        raise UsageError("too few samples for slope estimation", samples=len(trace), required=2 * window)
    t = trace.times[-window:]
    m = trace.column("mean")[-window:]
    fit = sm.OLS(m, sm.add_constant(t, has_constant="add")).fit()
    residual = float(np.abs(fit.resid).max())
    return SlopeEstimate(float(fit.params[1]), float(fit.params[0]), residual, window)
