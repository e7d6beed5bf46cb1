"""
Levy-Ito operator on the torus and its exponential counterpart

The measure is split at the cutoff delta = h. Jumps below the cutoff are
lumped into a second-order term built from their second-moment tensor. Jumps in
[delta, R_max] become radial cells with exact masses, placed at the
second-moment radius and spread onto the grid by multilinear interpolation.
Mass beyond R_max is reported and, with tail closure on, sent to a
uniformly distributed arrival point.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import structlog
from scipy import fft, integrate, special

from ..core.config import Settings, get_settings
from ..core.errors import ConfigurationError, DomainError, UsageError
from ..core.monitoring import DiagnosticsLog, record
from ..problem.models import LevyFamily
from ..problem.spec import LevyData, ProblemSpec
from .grid import GridFunction, TorusGrid

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class QuadratureNodes:
    """x-independent jump nodes: offsets z_q, weights w_q, compensator flags"""
    z: np.ndarray
    weights: np.ndarray
    compensated: np.ndarray

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class QuadratureTable:
    """Precomputed nonlocal stencil for one (LevyData, grid) pair

    Per grid point: folded arrival indices with nonnegative weights, the
    small-jump coefficient kappa_small (trace of the small-jump tensor), the
    interpolation defect per axis, the resulting axis and diagonal second-order
    coefficients, and the compensator drift.
    """
    grid: TorusGrid
    delta: float
    tail_radius: float
    nodes_per_decade: int
    nodes: QuadratureNodes
    kappa_small: np.ndarray
    kappa_tensor: np.ndarray
    interpolation_defect: np.ndarray
    second_order: np.ndarray
    cross_order: np.ndarray
    cross_sign: np.ndarray
    drift: np.ndarray
    stencil_index: np.ndarray
    stencil_weight: np.ndarray
    tail_mass: float
    tail_closure: bool
    translation_invariant: bool
    clipped_points: int = 0

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def dropped_tail_mass(self) -> float:
        return self.tail_mass

    @property
    def total_weight(self) -> np.ndarray:
        return self.stencil_weight.sum(axis=1)

    @property
    def plain_mass(self) -> float:
        """Weight of nodes with |z| > 1"""
        return float(self.nodes.weights[~self.nodes.compensated].sum())

    def check_grid(self, grid: TorusGrid) -> None:
        if grid != self.grid:
            raise UsageError("quadrature table was built on a different grid",
                             table_N=self.grid.points_per_axis, N=grid.points_per_axis)

    def stats(self) -> Dict[str, Any]:
        return {
            "node_count": self.node_count,
            "stencil_width": int(self.stencil_index.shape[1]),
            "dropped_tail_mass": self.tail_mass,
            "tail_closure": self.tail_closure,
            "kappa_min": float(self.kappa_small.min()),
            "kappa_max": float(self.kappa_small.max()),
            "defect_max": float(self.interpolation_defect.max(initial=0.0)),
            "cross_max": float(self.cross_order.max(initial=0.0)),
            "drift_max": float(np.abs(self.drift).max(initial=0.0)),
            "weight_max": float(self.total_weight.max(initial=0.0)),
            "clipped_points": self.clipped_points,
        }


def radial_edges(levy: LevyData, delta: float, radius: float, nodes_per_decade: int, h: float) -> np.ndarray:
    """Geometric cell edges from delta to radius, widths capped at h

    The compensation threshold |z| = 1 and the support radius of a finite
    density are always edges.
    """
    ratio = 10.0 ** (1.0 / nodes_per_decade)
    stops = [1.0, levy.outer_radius, radius]
    stops = sorted({s for s in stops if delta < s <= radius} | {radius})
    edges: List[float] = [delta]
    for stop in stops:
        while edges[-1] < stop * (1.0 - 1e-14):
            r = edges[-1]
            edges.append(min(r * ratio, r + h, stop))
    return np.asarray(edges)


def build_nodes(levy: LevyData, delta: float, radius: float, nodes_per_decade: int, h: float,
                angular_nodes: int) -> QuadratureNodes:
    d = levy.dimension
    if not levy.is_active:
        return QuadratureNodes(np.zeros((0, d)), np.zeros(0), np.zeros(0, dtype=bool))

    if levy.family == LevyFamily.ATOMIC:
        z = np.array([a[0] for a in levy.atoms], dtype=float).reshape(-1, d)
        w = np.array([a[1] for a in levy.atoms], dtype=float)
        r = np.linalg.norm(z, axis=-1)
        keep = (r >= delta) & (r <= radius) & (w > 0)
        return QuadratureNodes(z[keep], w[keep], r[keep] <= 1.0)

    edges = radial_edges(levy, delta, radius, nodes_per_decade, h)
    r0, r1 = edges[:-1], edges[1:]
    mass = levy.radial_mass(r0, r1)
    second = levy.radial_moment(r0, r1, 2.0)
    keep = mass > 0
    r0, r1, mass, second = r0[keep], r1[keep], mass[keep], second[keep]
    r_star = np.sqrt(second / mass)
    compensated = r1 <= 1.0 + 1e-14

    if d == 1:
        z = np.concatenate([r_star, -r_star])[:, None]
        w = np.concatenate([mass, mass]) / 2.0
        return QuadratureNodes(z, w, np.concatenate([compensated, compensated]))

    zs, ws, cs = [], [], []
    for radius_q, mass_q, comp_q in zip(r_star, mass, compensated):
        count = max(angular_nodes, int(np.ceil(2.0 * np.pi * radius_q / h)))
        count += count % 2
        angles = (np.arange(count) + 0.5) * (2.0 * np.pi / count)
        zs.append(radius_q * np.stack([np.cos(angles), np.sin(angles)], axis=-1))
        ws.append(np.full(count, mass_q / count))
        cs.append(np.full(count, comp_q))
    return QuadratureNodes(np.concatenate(zs), np.concatenate(ws), np.concatenate(cs))


def _fold_row(grid: TorusGrid, base_point: np.ndarray, arrivals: np.ndarray, weights: np.ndarray,
              self_index: int) -> np.ndarray:
    """Dense row of folded interpolation weights, self-arrivals removed"""
    indices, coeffs = grid.interpolation_stencil(base_point + arrivals)
    row = np.bincount(indices.ravel(), weights=(coeffs * weights[:, None]).ravel(), minlength=grid.size)
    row[self_index] = 0.0
    return row


def _defect(grid: TorusGrid, arrivals: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """sum_q w_q theta(1 - theta) h^2 / 2 per axis"""
    frac = grid.interpolation_fractions(arrivals)
    return (weights[:, None] * frac * (1.0 - frac)).sum(axis=0) * grid.h ** 2 / 2.0


def _split_small_jumps(kappa_tensor: np.ndarray,
                       defect: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Monotone split of sum_ij K_ij d_ij u into axis and diagonal second differences

    K_11 d_11 + K_22 d_22 + 2 K_12 d_12 equals (K_11 - |K_12|) d_11 + (K_22 - |K_12|) d_22
    + |K_12| d_ee along e = (1, sign K_12). The interpolation defect is taken off
    the axis coefficients first; whatever would turn negative is clipped.
    """
    n, d = defect.shape
    available = np.diagonal(kappa_tensor, axis1=1, axis2=2) - defect
    if d == 1:
        off = np.zeros(n)
    else:
        off = kappa_tensor[:, 0, 1]
    room = np.maximum(available.min(axis=1), 0.0)
    cross = np.minimum(np.abs(off), room)
    sign = np.where(off < 0.0, -1.0, 1.0)
    second_order = np.maximum(available - cross[:, None], 0.0)
    scale = np.abs(kappa_tensor).max(initial=0.0)
    clipped = np.any(available < 0.0, axis=1) | (np.abs(off) - cross > 1e-14 * scale)
    return second_order, cross, sign, int(np.count_nonzero(clipped))


def _cross_increments(grid: TorusGrid, sign: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """u(x + h e) - u(x) and u(x - h e) - u(x) along e = (1, sign); zero in 1D"""
    if grid.dimension == 1:
        zero = np.zeros_like(values)
        return zero, zero
    up, down = [], []
    for s in (1, -1):
        up.append(grid.shift(grid.shift(values, 0, 1), 1, s) - values)
        down.append(grid.shift(grid.shift(values, 0, -1), 1, -s) - values)
    positive = sign > 0.0
    return np.where(positive, up[0], up[1]), np.where(positive, down[0], down[1])


def build_table(spec: ProblemSpec, grid: TorusGrid, nodes_per_decade: Optional[int] = None,
                tail_radius: Optional[float] = None, tail_closure: Optional[bool] = None,
                settings: Optional[Settings] = None,
                diagnostics: Optional[DiagnosticsLog] = None) -> QuadratureTable:
    """Nonlocal stencil of I^j on the grid"""
    settings = settings or get_settings()
    Q = nodes_per_decade or settings.nodes_per_decade
    R = tail_radius if tail_radius is not None else settings.tail_radius
    closure = settings.tail_closure if tail_closure is None else tail_closure
    if R < 1.0:
        raise ConfigurationError("tail radius R_max must be at least 1", tail_radius=R)
    if grid.dimension != spec.dimension:
        raise UsageError("grid and problem dimensions differ", grid=grid.dimension, problem=spec.dimension)

    levy = spec.levy
    n, d, h = grid.size, grid.dimension, grid.h
    delta = h
    nodes = build_nodes(levy, delta, R, Q, h, settings.angular_nodes)
    points = grid.points
    scale = levy.jump_scale(points)

    moment = levy.inner_second_moment_tensor(delta)
    kappa_tensor = 0.5 * scale[:, None, None] ** 2 * moment[None, :, :]
    kappa = np.trace(kappa_tensor, axis1=1, axis2=2)
    comp_z, comp_w = nodes.z[nodes.compensated], nodes.weights[nodes.compensated]
    drift_base = (comp_w[:, None] * comp_z).sum(axis=0)
    drift_base[np.abs(drift_base) <= 1e-13 * max(float((comp_w[:, None] * np.abs(comp_z)).sum()), 1e-300)] = 0.0
    drift = scale[:, None] * drift_base[None, :]

    translation = levy.is_translation
    if len(nodes) == 0:
        stencil_index = np.zeros((n, 0), dtype=np.int64)
        stencil_weight = np.zeros((n, 0))
        defect = np.zeros((n, d))
    elif translation:
        row = _fold_row(grid, np.zeros(d), nodes.z, nodes.weights, 0)
        targets = np.flatnonzero(row > 0.0)
        offsets = grid.multi_index[targets]
        stencil_index = grid.flat_index(grid.multi_index[:, None, :] + offsets[None, :, :])
        stencil_weight = np.broadcast_to(row[targets], (n, len(targets))).copy()
        defect = np.broadcast_to(_defect(grid, comp_z, comp_w), (n, d)).copy()
    else:
        dense = np.empty((n, n))
        defect = np.empty((n, d))
        for i in range(n):
            arrivals = scale[i] * nodes.z
            dense[i] = _fold_row(grid, points[i], arrivals, nodes.weights, i)
            defect[i] = _defect(grid, points[i] + scale[i] * comp_z, comp_w)
        stencil_index = np.broadcast_to(np.arange(n), (n, n)).copy()
        stencil_weight = dense

    # interpolation over-diffuses by the defect; remove it from the small-jump term
    second_order, cross_order, cross_sign, clipped = _split_small_jumps(kappa_tensor, defect)

    table = QuadratureTable(
        grid=grid,
        delta=delta,
        tail_radius=R,
        nodes_per_decade=Q,
        nodes=nodes,
        kappa_small=kappa,
        kappa_tensor=kappa_tensor,
        interpolation_defect=defect,
        second_order=second_order,
        cross_order=cross_order,
        cross_sign=cross_sign,
        drift=drift,
        stencil_index=stencil_index,
        stencil_weight=stencil_weight,
        tail_mass=levy.tail_mass(R),
        tail_closure=closure,
        translation_invariant=translation,
        clipped_points=clipped,
    )
    stats = table.stats()
    logger.info("Quadrature table built", N=grid.points_per_axis, Q=Q, R_max=R, **stats)
    record(diagnostics, "nonlocal", "table_built", N=grid.points_per_axis, Q=Q, R_max=R, **stats)
    if clipped:
        record(diagnostics, "nonlocal", "defect_clip_warning", clipped_points=clipped)
    return table


def _upwind_drift(table: QuadratureTable, forward: np.ndarray, backward: np.ndarray) -> np.ndarray:
    b = table.drift
    return -(np.maximum(b, 0.0) * backward + np.minimum(b, 0.0) * forward).sum(axis=1)


def apply_Ij_values(table: QuadratureTable, values: np.ndarray) -> np.ndarray:
    """I_h u on raw values"""
    grid = table.grid
    result = np.sum((values[table.stencil_index] - values[:, None]) * table.stencil_weight, axis=1)
    result += (table.second_order * grid.second_differences(values)).sum(axis=1)
    up, down = _cross_increments(grid, table.cross_sign, values)
    result += table.cross_order * (up + down) / grid.h ** 2
    if np.any(table.drift):
        result += _upwind_drift(table, grid.forward_differences(values), grid.backward_differences(values))
    if table.tail_closure and table.tail_mass > 0.0:
        result += table.tail_mass * (grid.mean(values) - values)
    return result


def apply_Ij(table: QuadratureTable, u: GridFunction, grad=None) -> GridFunction:
    """Discrete Levy-Ito operator applied to u

    grad is accepted for call compatibility; the compensator is applied as
    an upwinded drift built from one-sided differences of u.
    """
    table.check_grid(u.grid)
    return u.with_values(apply_Ij_values(table, u.values))


def apply_Jj_values(table: QuadratureTable, values: np.ndarray, guard: Optional[float] = None) -> np.ndarray:
    """Exponential operator J_h v, satisfying I_h(e^v) = e^v J_h(v) term by term"""
    guard = guard if guard is not None else get_settings().exp_guard
    osc = float(values.max() - values.min())
    if osc > guard:
        raise DomainError("exponential operator overflow guard", osc=osc, guard=guard)

    grid = table.grid
    h = grid.h
    result = np.sum(np.expm1(values[table.stencil_index] - values[:, None]) * table.stencil_weight, axis=1)

    up = np.stack([grid.shift(values, a, 1) - values for a in range(grid.dimension)], axis=-1)
    down = np.stack([grid.shift(values, a, -1) - values for a in range(grid.dimension)], axis=-1)
    result += (table.second_order * (np.expm1(up) + np.expm1(down)) / h ** 2).sum(axis=1)
    cross_up, cross_down = _cross_increments(grid, table.cross_sign, values)
    result += table.cross_order * (np.expm1(cross_up) + np.expm1(cross_down)) / h ** 2

    if np.any(table.drift):
        # D+(e^v) = e^v (e^{h D+ v} - 1) / h and D-(e^v) = e^v (1 - e^{-h D- v}) / h
        result += _upwind_drift(table, np.expm1(up) / h, -np.expm1(down) / h)

    if table.tail_closure and table.tail_mass > 0.0:
        top = values.max()
        shifted_mean = grid.mean(np.exp(values - top))
        result += table.tail_mass * (shifted_mean * np.exp(top - values) - 1.0)
    return result


def apply_Jj(table: QuadratureTable, v: GridFunction, grad=None) -> GridFunction:
    table.check_grid(v.grid)
    return v.with_values(apply_Jj_values(table, v.values))


@dataclass(frozen=True)
class SmallJumpDefect:
    """Gap between exponential and linear small-jump terms"""
    defect: float
    gradient_sq: float
    scale: float

    @property
    def ratio(self) -> float:
        return self.defect / self.scale if self.scale > 0 else 0.0


def small_jump_defect(table: QuadratureTable, g: GridFunction, order: Optional[float] = None) -> SmallJumpDefect:
    """max |J_h[B_delta](g) - I_h[B_delta](g)| and the scale ||Dg||^2 delta^(2 - order)"""
    table.check_grid(g.grid)
    grid = table.grid
    values = g.values
    kappa_tensor = table.kappa_tensor
    axis_coefficient, cross, sign, _ = _split_small_jumps(kappa_tensor, np.zeros((grid.size, grid.dimension)))
    up = np.stack([grid.shift(values, a, 1) - values for a in range(grid.dimension)], axis=-1)
    down = np.stack([grid.shift(values, a, -1) - values for a in range(grid.dimension)], axis=-1)
    cross_up, cross_down = _cross_increments(grid, sign, values)
    linear = ((axis_coefficient * (up + down)).sum(axis=1) + cross * (cross_up + cross_down)) / grid.h ** 2
    exponential = ((axis_coefficient * (np.expm1(up) + np.expm1(down))).sum(axis=1)
                   + cross * (np.expm1(cross_up) + np.expm1(cross_down))) / grid.h ** 2
    gradient_sq = float(np.max(np.sum(grid.forward_differences(values) ** 2, axis=1)))
    exponent = 2.0 - order if order is not None else 2.0
    return SmallJumpDefect(
        defect=float(np.abs(exponential - linear).max()),
        gradient_sq=gradient_sq,
        scale=gradient_sq * table.delta ** exponent,
    )


@lru_cache(maxsize=4096)
def fractional_multiplier(k: int, order: float) -> float:
    """Phi(k) = int_R (1 - cos(2 pi k z)) |z|^(-1-order) dz by adaptive quadrature

    Split at z_s = 1/k: the near part uses an algebraic weight z^(1-order)
    on the smooth factor 2 sin^2(pi k z)/z^2, the far part its analytic
    non-oscillatory piece plus a Fourier-weighted integral to infinity.
    """
    k = abs(int(k))
    if k == 0:
        return 0.0
    split = 1.0 / k

    def smooth(z):
        return 2.0 * (np.pi * k) ** 2 * np.sinc(k * z) ** 2

    near, _ = integrate.quad(smooth, 0.0, split, weight="alg", wvar=(1.0 - order, 0.0),
                             epsabs=0.0, epsrel=1e-12, limit=200)
    oscillating, _ = integrate.quad(lambda z: z ** (-1.0 - order), split, np.inf, weight="cos",
                                    wvar=2.0 * np.pi * k, epsabs=1e-14)
    far = split ** (-order) / order - oscillating
    return float(2.0 * (near + far))


def fractional_multiplier_closed_form(k: int, order: float) -> float:
    """2 (-Gamma(-order) cos(pi order / 2)) |2 pi k|^order, pi |2 pi k| at order 1"""
    xi = 2.0 * np.pi * abs(k)
    if xi == 0.0:
        return 0.0
    if abs(order - 1.0) < 1e-12:
        return float(np.pi * xi)
    return float(2.0 * special.gamma(1.0 - order) / order * np.cos(np.pi * order / 2.0) * xi ** order)


def fractional_reference(u: GridFunction, order: float, intensity: float = 1.0,
                         spec: Optional[ProblemSpec] = None) -> GridFunction:
    """Exact periodic fractional operator by Fourier multiplier -Phi(k)"""
    if u.grid.dimension != 1:
        raise UsageError("Fourier reference is one-dimensional", dimension=u.grid.dimension)
    if spec is not None and not spec.levy.is_translation:
        raise UsageError("Fourier reference needs translation jumps j(x, z) = z")
    if not 0.0 < order < 2.0:
        raise ConfigurationError("fractional order must lie in (0, 2)", order=order)

    N = u.grid.points_per_axis
    modes = fft.rfft(u.values)
    multiplier = np.array([-intensity * fractional_multiplier(k, float(order)) for k in range(len(modes))])
    return u.with_values(fft.irfft(modes * multiplier, n=N))


def multiplier_table(N: int, order: float) -> Tuple[np.ndarray, np.ndarray]:
    """Quadrature and closed-form multipliers for k = 0..N/2"""
    ks = np.arange(N // 2 + 1)
    return (np.array([fractional_multiplier(int(k), float(order)) for k in ks]),
            np.array([fractional_multiplier_closed_form(int(k), float(order)) for k in ks]))
