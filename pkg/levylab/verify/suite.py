"""
Acceptance suite: every acceptance criterion as a verdict
"""

from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import structlog

from ..core.config import Settings, get_settings
from ..core.errors import UsageError
from ..core.export import frame_digest
from ..core.monitoring import DiagnosticsLog, record
from ..numerics.grid import GridFunction, TorusGrid
from ..numerics.levy import apply_Ij_values, build_table, fractional_reference
from ..problem import catalog
from ..problem.assumptions import run_all_checks
from ..problem.models import NumericsConfig
from ..solvers.ergodic import profile_uniqueness_probe, two_route_constant, vanishing_discount
from .harness import (
    Verdict,
    bernstein_identity_check,
    comparison_harness,
    kappa_monotonicity_check,
    sup_bound_check,
)
from .reachability import covering_check

logger = structlog.get_logger(__name__)

ACCURACY_ORDERS = (0.5, 1.0, 1.5)
ACCURACY_THRESHOLD = 1e-2
REFINEMENT_SLACK = 1.2
ERGODIC_THRESHOLD = 5e-2
COVERING_RADIUS = 0.1
PROBE_THRESHOLD = 1e-2
SCHEDULE_TAIL = 0.0125
DEFECT_FLOOR = 1e-6
SHORT_HORIZON = 5.0


def ordered_pairs(grid: TorusGrid, count: int, seed: int) -> List[Tuple[GridFunction, GridFunction]]:
    """Random smooth lower data with nonnegative smooth bumps on top"""
    rng = np.random.default_rng(seed)
    x = grid.points[:, 0]
    pairs = []
    for _ in range(count):
        modes = np.arange(1, 4)
        amplitude = rng.normal(scale=0.3, size=len(modes)) / modes
        phase = rng.uniform(0.0, 1.0, size=len(modes))
        lower = np.sum(amplitude[:, None] * np.cos(2.0 * np.pi * modes[:, None] * (x[None, :] - phase[:, None])), axis=0)
        centre = rng.uniform(0.0, 1.0)
        bump = rng.uniform(0.1, 1.0) * 0.5 * (1.0 + np.cos(2.0 * np.pi * (x - centre))) + rng.uniform(0.0, 0.1)
        pairs.append((GridFunction(grid, lower), GridFunction(grid, lower + bump)))
    return pairs


def assumption_verdict(numerics: NumericsConfig, seed: int, settings: Settings) -> Verdict:
    spec = catalog.eikonal()
    seeds = sorted({seed, *numerics.seeds})
    reports = run_all_checks(spec, seeds, numerics.check_samples, settings)
    failed = [r for r in reports if not r.passed]
    worst = min(reports, key=lambda r: r.worst_slack)
    return Verdict(name="assumptions", instance=spec.name, passed=not failed,
                   witness={"failed": [f"{r.name}@{r.details.get('seed')}" for r in failed],
                            "worst_check": worst.name},
                   max_defect=max(0.0, -worst.worst_slack))


def nonlocal_accuracy(N: int, order: float, nodes_per_decade: int, tail_radius: float,
                      settings: Settings) -> float:
    """Relative sup error of I_h cos(2 pi x) against the Fourier reference"""
    grid = TorusGrid(1, N)
    spec = catalog.eikonal(levy={"family": "fractional", "order": order})
    u = GridFunction.from_function(grid, lambda x: np.cos(2.0 * np.pi * x[:, 0]))
    table = build_table(spec, grid, nodes_per_decade, tail_radius, settings=settings)
    reference = fractional_reference(u, order, spec=spec).values
    return float(np.abs(apply_Ij_values(table, u.values) - reference).max() / np.abs(reference).max())


def accuracy_verdict(numerics: NumericsConfig, settings: Settings) -> Verdict:
    errors: Dict[str, float] = {}
    passed = True
    for order in ACCURACY_ORDERS:
        coarse = nonlocal_accuracy(numerics.points_per_axis, order, numerics.nodes_per_decade,
                                   numerics.tail_radius, settings)
        fine = nonlocal_accuracy(numerics.points_per_axis, order, 2 * numerics.nodes_per_decade,
                                 numerics.tail_radius, settings)
        errors[f"order={order:g}"] = coarse
        errors[f"order={order:g},2Q"] = fine
        passed = passed and coarse <= ACCURACY_THRESHOLD and fine <= REFINEMENT_SLACK * coarse
    return Verdict(name="nonlocal_accuracy", instance="fractional", passed=passed, witness=errors,
                   max_defect=max(errors.values()))


def bernstein_verdict(numerics: NumericsConfig, settings: Settings) -> Verdict:
    spec = catalog.eikonal()
    options = numerics.operator_options()
    verdicts = []
    for N in (numerics.points_per_axis, 2 * numerics.points_per_axis):
        grid = TorusGrid(1, N)
        v = GridFunction.from_function(grid, lambda x: 0.3 * np.cos(2.0 * np.pi * x[:, 0]))
        verdicts.append(bernstein_identity_check(spec, [v], settings=settings, **options))
    coarse, fine = verdicts
    nonlocal_defect = max(v.witness["nonlocal_defect"] for v in verdicts)
    ratio = fine.max_defect / coarse.max_defect if coarse.max_defect > 0 else 0.0
    passed = coarse.passed and nonlocal_defect <= 1e-8 and ratio <= 0.7
    return Verdict(name="bernstein_identity", instance=spec.name, passed=passed,
                   witness={"refinement_ratio": ratio, "nonlocal_defect": nonlocal_defect,
                            "fine_defect": fine.max_defect},
                   max_defect=coarse.max_defect)


def comparison_verdict(numerics: NumericsConfig, seed: int, settings: Settings) -> Verdict:
    spec = catalog.mixed()
    grid = TorusGrid(1, numerics.points_per_axis)
    pairs = ordered_pairs(grid, 20, seed)
    return comparison_harness(spec, pairs, min(SHORT_HORIZON, numerics.T_final), settings=settings,
                              **numerics.operator_options())


def sup_bound_verdicts(numerics: NumericsConfig, settings: Settings) -> List[Verdict]:
    grid = TorusGrid(1, numerics.points_per_axis)
    return [
        sup_bound_check(catalog.eikonal(discount=lam), grid, numerics.tolerance, settings=settings,
                        max_steps=numerics.max_steps, **numerics.operator_options())
        for lam in numerics.discounts
    ]


def uniformity_verdict(numerics: NumericsConfig, settings: Settings) -> Verdict:
    spec = catalog.mixed()
    grid = TorusGrid(1, numerics.points_per_axis)
    result = vanishing_discount(spec, numerics.lambda_schedule, numerics.tolerance, grid,
                                anchor_index=numerics.anchor_index, max_steps=numerics.max_steps,
                                settings=settings, **numerics.operator_options())
    records = result.records
    tail = records[records["lam"] <= SCHEDULE_TAIL]
    if len(tail) < 2:
        tail = records.tail(2)
    osc_ratio = float(tail["osc"].max() / tail["osc"].min()) if tail["osc"].min() > 0 else 1.0
    lip_ratio = float(records["lipschitz"].max() / records["lipschitz"].iloc[0])
    gaps = np.abs(np.diff(records["lam_u_anchor"].to_numpy()))
    cauchy = bool(len(gaps) < 2 or gaps[-1] <= gaps[0])
    passed = osc_ratio <= 1.1 and lip_ratio <= 2.0 and cauchy
    return Verdict(name="lambda_uniform_bounds", instance=spec.name, passed=passed,
                   witness={"osc_ratio": osc_ratio, "lip_ratio": lip_ratio, "cauchy": cauchy,
                            "c_discount": result.c_discount},
                   max_defect=max(osc_ratio - 1.0, 0.0))


def eikonal_constant_verdict(numerics: NumericsConfig, settings: Settings) -> Verdict:
    spec = catalog.first_order_eikonal()
    grid = TorusGrid(1, numerics.points_per_axis)
    result = two_route_constant(spec, numerics.T_final, numerics.lambda_schedule, grid,
                                checkpoints=numerics.checkpoints, tol=numerics.tolerance,
                                anchor_index=numerics.anchor_index, settings=settings,
                                **numerics.operator_options())
    exact = spec.hamiltonian.f.min_value
    error = abs(result.c_discount - exact)
    slope_error = abs(result.c_slope - exact)
    return Verdict(name="ergodic_min_f", instance=spec.name,
                   passed=error <= ERGODIC_THRESHOLD and slope_error <= ERGODIC_THRESHOLD,
                   witness={"c_discount": result.c_discount, "c_slope": result.c_slope, "exact": exact},
                   max_defect=max(error, slope_error))


def _defects_decrease(defects: Dict[float, float]) -> bool:
    values = [defects[t] for t in sorted(defects)]
    return all(b <= REFINEMENT_SLACK * a or b <= DEFECT_FLOOR for a, b in zip(values, values[1:]))


def two_route_verdict(numerics: NumericsConfig, settings: Settings) -> Verdict:
    spec = catalog.mixed()
    grid = TorusGrid(1, numerics.points_per_axis)
    result = two_route_constant(spec, numerics.T_final, numerics.lambda_schedule, grid,
                                checkpoints=numerics.checkpoints, tol=numerics.tolerance,
                                anchor_index=numerics.anchor_index, settings=settings,
                                **numerics.operator_options())
    decreasing = _defects_decrease(result.convergence_defects)
    return Verdict(name="two_route_constant", instance=spec.name,
                   passed=result.agreement_gap <= ERGODIC_THRESHOLD and decreasing,
                   witness={"c_discount": result.c_discount, "c_slope": result.c_slope,
                            "defects": {f"{t:g}": d for t, d in sorted(result.convergence_defects.items())}},
                   max_defect=result.agreement_gap)


def kappa_verdict(numerics: NumericsConfig, seed: int, settings: Settings) -> Verdict:
    spec = catalog.eikonal()
    grid = TorusGrid(1, numerics.points_per_axis)
    pairs = ordered_pairs(grid, 5, seed + 1)
    return kappa_monotonicity_check(spec, pairs, min(SHORT_HORIZON, numerics.T_final), settings=settings,
                                    **numerics.operator_options())


def covering_verdicts(numerics: NumericsConfig, settings: Settings) -> List[Verdict]:
    grid = TorusGrid(1, numerics.points_per_axis)
    full = catalog.mixed()
    atomic = catalog.atomic_degenerate()
    full_report = covering_check(full, grid, COVERING_RADIUS, settings)
    atomic_report = covering_check(atomic, grid, COVERING_RADIUS, settings)

    probe_spec = catalog.mixed(exponent=2.0)
    x = grid.points[:, 0]
    perturbations = [GridFunction.constant(grid, 0.0), GridFunction(grid, 0.5 * np.sin(2.0 * np.pi * x))]
    probe = profile_uniqueness_probe(probe_spec, perturbations, numerics.T_final,
                                     covering_passed=full_report.passed, anchor_index=numerics.anchor_index,
                                     settings=settings, **numerics.operator_options())
    return [
        Verdict(name="covering_full_support", instance=full.name, passed=full_report.passed,
                witness=full_report.witness, max_defect=float(full_report.failing_points)),
        Verdict(name="covering_atomic_fails", instance=atomic.name,
                passed=not atomic_report.passed and bool(atomic_report.witness),
                witness=atomic_report.witness, max_defect=float(atomic_report.failing_points)),
        Verdict(name="profile_uniqueness", instance=probe_spec.name,
                passed=probe.informational or probe.distance <= PROBE_THRESHOLD,
                informational=probe.informational, witness={"reason": probe.reason},
                max_defect=probe.distance),
    ]


def verdicts_frame(verdicts: Iterable[Verdict]) -> pd.DataFrame:
    rows = [v.to_row() for v in verdicts]
    return pd.DataFrame(rows, columns=["name", "instance", "passed", "informational", "witness", "max_defect"])


def determinism_verdict(numerics: NumericsConfig, seed: int, settings: Settings) -> Verdict:
    """Run a cheap sub-suite twice and compare CSV digests"""
    cheap = numerics.model_copy(update={"points_per_axis": min(numerics.points_per_axis, 64),
                                        "check_samples": min(numerics.check_samples, 256)})
    digests = []
    for _ in range(2):
        frame = verdicts_frame([assumption_verdict(cheap, seed, settings), accuracy_verdict(cheap, settings)])
        digests.append(frame_digest(frame))
    return Verdict(name="determinism", instance="sub-suite", passed=digests[0] == digests[1],
                   witness={"digest": digests[0][:16]}, max_defect=0.0 if digests[0] == digests[1] else 1.0)


CRITERIA: Dict[int, Callable[[NumericsConfig, int, Settings], Any]] = {
    1: lambda n, s, st: assumption_verdict(n, s, st),
    2: lambda n, s, st: accuracy_verdict(n, st),
    3: lambda n, s, st: bernstein_verdict(n, st),
    4: lambda n, s, st: comparison_verdict(n, s, st),
    5: lambda n, s, st: sup_bound_verdicts(n, st),
    6: lambda n, s, st: uniformity_verdict(n, st),
    7: lambda n, s, st: eikonal_constant_verdict(n, st),
    8: lambda n, s, st: two_route_verdict(n, st),
    9: lambda n, s, st: kappa_verdict(n, s, st),
    10: lambda n, s, st: covering_verdicts(n, st),
    11: lambda n, s, st: determinism_verdict(n, s, st),
}


def acceptance_suite(numerics: Optional[NumericsConfig] = None, seed: int = 0,
                     criteria: Optional[Sequence[int]] = None, settings: Optional[Settings] = None,
                     diagnostics: Optional[DiagnosticsLog] = None) -> List[Verdict]:
    """Run the selected acceptance criteria (all by default), in order"""
    numerics = numerics or NumericsConfig()
    settings = settings or get_settings()
    selected = list(criteria) if criteria is not None else sorted(CRITERIA)
    unknown = [n for n in selected if n not in CRITERIA]
    if unknown:
        raise UsageError("unknown acceptance criteria", unknown=unknown, available=sorted(CRITERIA))
    verdicts: List[Verdict] = []
    for number in selected:
        outcome = CRITERIA[number](numerics, seed, settings)
        batch = outcome if isinstance(outcome, list) else [outcome]
        for verdict in batch:
            logger.info("Verdict", criterion=number, name=verdict.name, passed=verdict.passed,
                        max_defect=verdict.max_defect)
            record(diagnostics, "verify", "verdict", criterion=number, name=verdict.name,
                   passed=verdict.passed, max_defect=verdict.max_defect)
        verdicts.extend(batch)
    return verdicts
