"""
Command-line front-end: python -m levylab CONFIG [--out DIR] [--seed INT] [--quiet]
"""

import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional

import click
import pandas as pd
import structlog

from .core.errors import ExitCode, LevyLabError
from .core.export import write_csv_atomic
from .core.monitoring import DiagnosticsLog, setup_logging
from .numerics.grid import GridFunction, TorusGrid, metrics
from .problem.assumptions import run_all_checks
from .problem.models import ExperimentConfig, load_experiment
from .problem.spec import build_problem
from .solvers.ergodic import solve_stationary, two_route_constant
from .solvers.evolution import evolve
from .verify.suite import acceptance_suite, verdicts_frame

logger = structlog.get_logger(__name__)


def _grid(config: ExperimentConfig) -> TorusGrid:
    return TorusGrid(config.problem.dimension, config.numerics.points_per_axis)


def run_check(config: ExperimentConfig, out: Path, diagnostics: DiagnosticsLog) -> int:
    spec = build_problem(config.problem)
    seeds = sorted({config.seed, *config.numerics.seeds})
    reports = run_all_checks(spec, seeds, config.numerics.check_samples)
    write_csv_atomic(pd.DataFrame([r.to_row() for r in reports]), out / "checks.csv")
    for report in reports:
        click.echo(f"{'PASS' if report.passed else 'FAIL'} {report.name} seed={report.details.get('seed')} "
                   f"worst_slack={report.worst_slack:.3e}")
        diagnostics.record("model", "check", name=report.name, passed=report.passed, worst_slack=report.worst_slack)
    return ExitCode.OK if all(r.passed for r in reports) else ExitCode.VIOLATION


def run_evolve(config: ExperimentConfig, out: Path, diagnostics: DiagnosticsLog) -> int:
    spec = build_problem(config.problem)
    grid = _grid(config)
    u0 = GridFunction.from_function(grid, spec.require_initial())
    numerics = config.numerics
    final, trace = evolve(spec, u0, numerics.T_final, config.output.sample_every,
                          checkpoints=numerics.checkpoints, diagnostics=diagnostics, **numerics.operator_options())
    write_csv_atomic(trace.to_frame(), out / "trace.csv")
    final.write_csv(out / "final_state.csv")
    click.echo(f"evolve {spec.name}: status={trace.status} steps={trace.steps} t={trace.stop_time:g} "
               f"osc={metrics(final).osc:.6g}")
    return ExitCode.OK


def run_stationary(config: ExperimentConfig, out: Path, diagnostics: DiagnosticsLog) -> int:
    spec = build_problem(config.problem)
    grid = _grid(config)
    numerics = config.numerics
    discounts = [spec.discount] if spec.discount > 0 else list(numerics.discounts)

    states: List[pd.DataFrame] = []
    rows: List[Dict[str, float]] = []
    current = GridFunction.constant(grid, 0.0)
    for lam in discounts:
        result = solve_stationary(spec.with_discount(lam), current, numerics.tolerance, numerics.max_steps,
                                  anchor_index=numerics.anchor_index, diagnostics=diagnostics,
                                  **numerics.operator_options())
        current = result.solution
        frame = current.to_frame()
        frame.insert(0, "lam", lam)
        states.append(frame)
        fm = metrics(current)
        bound = spec.hamiltonian.rest_bound(grid.points) / lam + 10.0 * numerics.tolerance
        rows.append({"lam": lam, **fm.as_dict(), "residual": result.residual, "steps": result.steps,
                     "sup_bound": bound, "within_bound": fm.sup_norm <= bound})
        click.echo(f"stationary {spec.name} lam={lam:g}: residual={result.residual:.3e} steps={result.steps} "
                   f"sup={fm.sup_norm:.6g} bound={bound:.6g}")

    write_csv_atomic(pd.concat(states, ignore_index=True), out / "stationary.csv")
    write_csv_atomic(pd.DataFrame(rows), out / "stationary_summary.csv")
    return ExitCode.OK if all(r["within_bound"] for r in rows) else ExitCode.VIOLATION


def run_ergodic(config: ExperimentConfig, out: Path, diagnostics: DiagnosticsLog) -> int:
    spec = build_problem(config.problem)
    numerics = config.numerics
    result = two_route_constant(spec, numerics.T_final, numerics.lambda_schedule, _grid(config),
                                checkpoints=numerics.checkpoints, tol=numerics.tolerance,
                                sample_every=config.output.sample_every, anchor_index=numerics.anchor_index,
                                diagnostics=diagnostics, **numerics.operator_options())
    write_csv_atomic(result.records, out / "ergodic.csv")
    write_csv_atomic(result.summary_frame(), out / "ergodic_summary.csv")
    result.profile.write_csv(out / "profile.csv")
    write_csv_atomic(result.trace.to_frame(), out / "trace.csv")
    click.echo(f"ergodic {spec.name}: c_discount={result.c_discount:.10g} c_slope={result.c_slope:.10g} "
               f"gap={result.agreement_gap:.3e}")
    return ExitCode.OK


def run_verify_all(config: ExperimentConfig, out: Path, diagnostics: DiagnosticsLog) -> int:
    verdicts = acceptance_suite(config.numerics, config.seed, diagnostics=diagnostics)
    write_csv_atomic(verdicts_frame(verdicts), out / "verdicts.csv")
    for verdict in verdicts:
        click.echo(verdict.summary())
    return ExitCode.OK if all(v.passed for v in verdicts) else ExitCode.VIOLATION


SUBCOMMANDS: Dict[str, Callable[[ExperimentConfig, Path, DiagnosticsLog], int]] = {
    "check": run_check,
    "evolve": run_evolve,
    "stationary": run_stationary,
    "ergodic": run_ergodic,
    "verify-all": run_verify_all,
}


def run(config_path: str, out: Optional[str] = None, seed: Optional[int] = None, quiet: bool = False) -> int:
    """Execute one experiment document and return the process exit code"""
    setup_logging(quiet=quiet)
    diagnostics = DiagnosticsLog()
    try:
        config = load_experiment(config_path)
    except LevyLabError as e:
        click.echo(f"error: {e.message}", err=True)
        logger.error("Configuration rejected", **e.to_dict())
        return int(e.exit_code)

    if seed is not None:
        config = config.model_copy(update={"seed": seed})
    directory = Path(out) if out is not None else Path(config.output.directory)
    directory.mkdir(parents=True, exist_ok=True)

    try:
        code = SUBCOMMANDS[config.subcommand](config, directory, diagnostics)
    except LevyLabError as e:
        click.echo(f"error: {e.message}", err=True)
        logger.error("Run failed", **e.to_dict())
        diagnostics.record("cli", "error", error=type(e).__name__, message=e.message)
        code = e.exit_code
    finally:
        write_csv_atomic(diagnostics.to_frame(), directory / "diagnostics.csv")

    logger.info("Run finished", subcommand=config.subcommand, exit_code=int(code), out=str(directory))
    return int(code)


@click.command()
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--out", "out", type=click.Path(file_okay=False), default=None, help="Output directory override")
@click.option("--seed", type=int, default=None, help="Seed override")
@click.option("--quiet", is_flag=True, help="Only log warnings and errors")
def main(config: str, out: Optional[str], seed: Optional[int], quiet: bool) -> None:
    """Run the experiment described by the YAML document CONFIG"""
    sys.exit(run(config, out, seed, quiet))
