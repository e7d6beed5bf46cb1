"""
Monotone discretization of the local terms: degenerate diffusion and the
Lax-Friedrichs Hamiltonian, plus the explicit rate and its stable step
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Union

import numpy as np
import structlog

from ..core.config import Settings, get_settings
from ..core.errors import UsageError
from ..core.monitoring import DiagnosticsLog, record
from ..problem.spec import DiffusionFactor, ProblemSpec
from .grid import GridFunction, TorusGrid, UpwindGradients, upwind_gradients
from .levy import QuadratureTable, apply_Ij_values, build_table

logger = structlog.get_logger(__name__)

LATTICE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class DiffusionStencil:
    """Tr(A D^2 u) as sum_m coefficient[i, m] * (u[index[i, m]] - u[i])"""
    index: np.ndarray
    coefficient: np.ndarray
    off_lattice_points: int = 0

    @property
    def diagonal(self) -> np.ndarray:
        return self.coefficient.sum(axis=1)

    def apply(self, values: np.ndarray) -> np.ndarray:
        if self.coefficient.shape[1] == 0:
            return np.zeros_like(values)
        return np.sum((values[self.index] - values[:, None]) * self.coefficient, axis=1)


def diffusion_stencil(diffusion: DiffusionFactor, grid: TorusGrid) -> DiffusionStencil:
    """Directional second differences along the columns of sigma(x)

    d = 1 uses the 3-point stencil scaled by a(x) = Tr A(x). In d = 2 each
    column s of sigma contributes |s|^2 times a second difference along s:
    with step h*m when s is parallel to a lattice vector m with entries in
    {-1, 0, 1}, and with step sqrt(h) and bilinear interpolation otherwise.
    """
    n, h = grid.size, grid.h
    if diffusion.is_zero:
        return DiffusionStencil(np.zeros((n, 0), dtype=np.int64), np.zeros((n, 0)))

    points = grid.points
    if grid.dimension == 1:
        a = diffusion.scalar_coefficient(points)
        index = np.stack([grid.flat_index(grid.multi_index + 1), grid.flat_index(grid.multi_index - 1)], axis=1)
        coefficient = np.repeat((a / h ** 2)[:, None], 2, axis=1)
        return DiffusionStencil(index, coefficient)

    sigma = diffusion.matrix(points)
    columns = sigma.shape[-1]
    slots = 8
    index = np.broadcast_to(np.arange(n)[:, None], (n, slots * columns)).copy()
    coefficient = np.zeros((n, slots * columns))
    off_lattice = np.zeros(n, dtype=bool)

    for c in range(columns):
        s = sigma[:, :, c]
        length = np.linalg.norm(s, axis=1)
        active = length > LATTICE_TOLERANCE
        if not np.any(active):
            continue
        base = slots * c
        scale = np.abs(s).max(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            m = np.where(active[:, None], s / scale[:, None], 0.0)
        rounded = np.rint(m)
        lattice = active & np.all(np.abs(m - rounded) < LATTICE_TOLERANCE, axis=1)

        if np.any(lattice):
            steps = rounded[lattice].astype(np.int64)
            weight = length[lattice] ** 2 / (h ** 2 * np.sum(steps ** 2, axis=1))
            origin = grid.multi_index[lattice]
            index[lattice, base] = grid.flat_index(origin + steps)
            index[lattice, base + 1] = grid.flat_index(origin - steps)
            coefficient[lattice, base] = weight
            coefficient[lattice, base + 1] = weight

        oblique = active & ~lattice
        if np.any(oblique):
            off_lattice |= oblique
            step = np.sqrt(h)
            direction = s[oblique] / length[oblique, None]
            weight = length[oblique] ** 2 / step ** 2
            for side, sign in enumerate((1.0, -1.0)):
                idx, w = grid.interpolation_stencil(points[oblique] + sign * step * direction)
                columns_slice = slice(base + 4 * side, base + 4 * side + 4)
                index[oblique, columns_slice] = idx
                coefficient[oblique, columns_slice] = w * weight[:, None]

    return DiffusionStencil(index, coefficient, int(off_lattice.sum()))


def apply_diffusion(spec: ProblemSpec, u: GridFunction) -> GridFunction:
    """Discrete Tr(A(x) D^2 u)"""
    return u.with_values(diffusion_stencil(spec.diffusion, u.grid).apply(u.values))


def gradient_extent(gradients: UpwindGradients) -> float:
    """Largest |p| the Lax-Friedrichs flux can see: per axis max(|D+|, |D-|)"""
    per_axis = np.maximum(np.abs(gradients.forward), np.abs(gradients.backward))
    return float(np.linalg.norm(per_axis, axis=1).max(initial=0.0))


@dataclass
class SchemeParams:
    """Lax-Friedrichs dissipation theta(x) and the gradient radius it covers

    theta only ever grows during a run.
    """
    grid: TorusGrid
    theta: np.ndarray
    gradient_range: float
    cfl_safety: float = 0.8
    theta_safety: float = 1.1
    margin: float = 0.1
    floor: float = 0.5
    refreshes: int = 0

    @classmethod
    def initial(cls, spec: ProblemSpec, grid: TorusGrid, gradient_bound: float = 0.0,
                settings: Optional[Settings] = None, cfl_safety: Optional[float] = None) -> "SchemeParams":
        settings = settings or get_settings()
        params = cls(
            grid=grid,
            theta=np.zeros(grid.size),
            gradient_range=0.0,
            cfl_safety=cfl_safety if cfl_safety is not None else settings.cfl_safety,
            theta_safety=settings.theta_safety,
            margin=settings.gradient_margin,
            floor=settings.gradient_floor,
        )
        params.refresh(spec, gradient_bound)
        return params

    def covers(self, gradient_bound: float) -> bool:
        return gradient_bound <= self.gradient_range

    def refresh(self, spec: ProblemSpec, gradient_bound: float) -> bool:
        """Raise theta to cover max(bound * (1 + margin), floor); returns whether theta grew"""
        target = max(gradient_bound * (1.0 + self.margin), self.floor)
        if target <= self.gradient_range:
            return False
        theta = self.theta_safety * spec.hamiltonian.gradient_bound(self.grid.points, target)
        grew = bool(np.any(theta > self.theta))
        self.theta = np.maximum(self.theta, theta)
        self.gradient_range = target
        self.refreshes += 1
        return grew

    @property
    def theta_max(self) -> float:
        return float(self.theta.max(initial=0.0))


def numerical_hamiltonian_values(spec: ProblemSpec, params: SchemeParams,
                                 forward: np.ndarray, backward: np.ndarray) -> np.ndarray:
    """H(x, (D+ + D-)/2) - sum_a theta (D+ - D-)_a / 2"""
    centered = 0.5 * (forward + backward)
    dissipation = 0.5 * params.theta * np.sum(forward - backward, axis=1)
    return spec.hamiltonian(params.grid.points, centered) - dissipation


def numerical_hamiltonian(spec: ProblemSpec, params: SchemeParams,
                          Dplus: Union[np.ndarray, UpwindGradients], Dminus: Optional[np.ndarray] = None,
                          diagnostics: Optional[DiagnosticsLog] = None) -> GridFunction:
    """Lax-Friedrichs flux on upwind gradient fields"""
    if isinstance(Dplus, UpwindGradients):
        gradients = Dplus
    else:
        if Dminus is None:
            raise UsageError("numerical_hamiltonian needs both one-sided gradients")
        gradients = UpwindGradients(np.asarray(Dplus), np.asarray(Dminus))
    if gradients.forward.shape != (params.grid.size, params.grid.dimension):
        raise UsageError("gradient fields do not match the scheme grid", shape=gradients.forward.shape)

    extent = gradient_extent(gradients)
    if not params.covers(extent):
        logger.warning("theta does not cover the gradient range", extent=extent, covered=params.gradient_range)
        record(diagnostics, "local", "theta_coverage_warning", extent=extent, covered=params.gradient_range)
    values = numerical_hamiltonian_values(spec, params, gradients.forward, gradients.backward)
    return GridFunction(params.grid, values)


def stable_timestep(spec: ProblemSpec, params: SchemeParams, table: Optional[QuadratureTable],
                    current_grad_bound: float = 0.0, diffusion: Optional[DiffusionStencil] = None) -> float:
    """Largest explicit step keeping every off-diagonal coefficient nonnegative, times the safety factor"""
    if current_grad_bound > 0.0 and not params.covers(current_grad_bound):
        params.refresh(spec, current_grad_bound)
    grid = params.grid
    diffusion = diffusion if diffusion is not None else diffusion_stencil(spec.diffusion, grid)

    rate = float(diffusion.diagonal.max(initial=0.0))
    if table is not None:
        nonlocal_rate = (table.total_weight
                         + 2.0 * (table.second_order.sum(axis=1) + table.cross_order) / grid.h ** 2
                         + np.abs(table.drift).sum(axis=1) / grid.h)
        rate += float(nonlocal_rate.max(initial=0.0))
        if table.tail_closure:
            rate += table.tail_mass
    rate += grid.dimension * params.theta_max * 2.0 / grid.h
    rate += spec.discount
    if rate <= 0.0:
        return params.cfl_safety
    return params.cfl_safety / rate


@dataclass
class SchemeOperators:
    """Everything one explicit step needs, built once per (spec, grid)"""
    spec: ProblemSpec
    grid: TorusGrid
    table: Optional[QuadratureTable]
    diffusion: DiffusionStencil
    params: SchemeParams
    settings: Settings = field(default_factory=get_settings)
    diagnostics: Optional[DiagnosticsLog] = None

    @classmethod
    def build(cls, spec: ProblemSpec, grid: TorusGrid, gradient_bound: float = 0.0,
              table: Optional[QuadratureTable] = None, settings: Optional[Settings] = None,
              diagnostics: Optional[DiagnosticsLog] = None, nodes_per_decade: Optional[int] = None,
              tail_radius: Optional[float] = None, tail_closure: Optional[bool] = None,
              cfl_safety: Optional[float] = None) -> "SchemeOperators":
        settings = settings or get_settings()
        if table is None and spec.levy.is_active:
            table = build_table(spec, grid, nodes_per_decade, tail_radius, tail_closure, settings, diagnostics)
        if table is not None:
            table.check_grid(grid)
        diffusion = diffusion_stencil(spec.diffusion, grid)
        if diffusion.off_lattice_points:
            record(diagnostics, "local", "oblique_diffusion", points=diffusion.off_lattice_points)
        params = SchemeParams.initial(spec, grid, gradient_bound, settings, cfl_safety)
        return cls(spec, grid, table, diffusion, params, settings, diagnostics)

    def with_discount(self, discount: float) -> "SchemeOperators":
        """Same stencils and theta for a different lambda"""
        return replace(self, spec=self.spec.with_discount(discount))

    def ensure_coverage(self, gradient_bound: float) -> bool:
        """Refresh theta immediately when the gradients leave its range"""
        if self.params.covers(gradient_bound):
            return False
        self.params.refresh(self.spec, gradient_bound)
        record(self.diagnostics, "local", "theta_refresh", reason="coverage",
               gradient_bound=gradient_bound, theta_max=self.params.theta_max)
        return True

    def timestep(self) -> float:
        return stable_timestep(self.spec, self.params, self.table, 0.0, self.diffusion)

    def rate(self, values: np.ndarray, gradients: Optional[UpwindGradients] = None) -> np.ndarray:
        """diffusion + nonlocal - H_hat - lambda u on raw values"""
        gradients = gradients or upwind_gradients(values, self.grid)
        result = self.diffusion.apply(values)
        if self.table is not None:
            result = result + apply_Ij_values(self.table, values)
        result = result - numerical_hamiltonian_values(self.spec, self.params, gradients.forward, gradients.backward)
        if self.spec.discount:
            result = result - self.spec.discount * values
        return result

    def describe(self) -> Dict[str, Any]:
        return {
            "N": self.grid.points_per_axis,
            "theta_max": self.params.theta_max,
            "gradient_range": self.params.gradient_range,
            "dt": self.timestep(),
            "discount": self.spec.discount,
        }


def explicit_rate(ops: SchemeOperators, u: Union[GridFunction, np.ndarray]) -> Union[GridFunction, np.ndarray]:
    """The bracket of the explicit update u + dt * rate"""
    if isinstance(u, GridFunction):
        if u.grid != ops.grid:
            raise UsageError("state lives on a different grid than the operators")
        return u.with_values(ops.rate(u.values))
    return ops.rate(np.asarray(u, dtype=float))
