"""
Nonlocal reachable sets on the grid and the covering condition
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import structlog

from ..core.config import Settings, get_settings
from ..numerics.grid import TorusGrid
from ..problem.models import LevyFamily
from ..problem.spec import LevyData, ProblemSpec

logger = structlog.get_logger(__name__)


@dataclass
class ReachableSet:
    """Cumulative masks X_0 subset X_1 subset ... started from one grid point"""
    base_index: int
    masks: List[np.ndarray] = field(default_factory=list)
    fixpoint: bool = False

    @property
    def closure(self) -> np.ndarray:
        return self.masks[-1]

    @property
    def iterations(self) -> int:
        return len(self.masks) - 1

    @property
    def size(self) -> int:
        return int(self.closure.sum())

    def is_monotone(self) -> bool:
        return all(np.all(a <= b) for a, b in zip(self.masks, self.masks[1:]))


class _Arrivals:
    """Grid cells reachable in one jump from each cell

    Cells are in the support when nu puts mass above the support threshold
    on them; for continuous families this is the ball of the support radius
    scaled by g(x), or the whole torus for fractional measures.
    """

    def __init__(self, levy: LevyData, grid: TorusGrid, settings: Settings):
        self.levy = levy
        self.grid = grid
        self.threshold = settings.support_threshold
        self.scale = levy.jump_scale(grid.points)
        self._offsets: Dict[int, np.ndarray] = {}

    def _continuous_offsets(self, radius: float) -> np.ndarray:
        grid = self.grid
        reach = int(np.ceil(radius / grid.h + 0.5))
        if 2 * reach + 1 >= grid.points_per_axis:
            return grid.multi_index - grid.multi_index[0]
        span = np.arange(-reach, reach + 1)
        lattice = np.stack(np.meshgrid(*([span] * grid.dimension), indexing="ij"), axis=-1).reshape(-1, grid.dimension)
        keep = np.linalg.norm(lattice * grid.h, axis=1) <= radius + grid.h / 2.0
        return lattice[keep]

    def offsets(self, index: int) -> np.ndarray:
        """Lattice offsets of the one-jump arrivals from cell index"""
        key = 0 if self.levy.is_translation else index
        if key in self._offsets:
            return self._offsets[key]
        levy, grid = self.levy, self.grid
        g = float(self.scale[index])
        if not levy.is_active:
            offsets = np.zeros((0, grid.dimension), dtype=np.int64)
        elif levy.family == LevyFamily.ATOMIC:
            z = np.array([a[0] for a in levy.atoms if a[1] > self.threshold], dtype=float).reshape(-1, grid.dimension)
            offsets = np.floor(g * z / grid.h + 0.5).astype(np.int64)
        elif levy.family == LevyFamily.FINITE and levy.mass > self.threshold:
            offsets = self._continuous_offsets(g * levy.radius)
        elif levy.family == LevyFamily.FRACTIONAL and levy.intensity > self.threshold:
            offsets = grid.multi_index - grid.multi_index[0]
        else:
            offsets = np.zeros((0, grid.dimension), dtype=np.int64)
        self._offsets[key] = offsets
        return offsets

    def targets(self, indices: np.ndarray) -> np.ndarray:
        grid = self.grid
        if len(indices) == 0:
            return indices
        if self.levy.is_translation:
            offsets = self.offsets(0)
            if len(offsets) == 0:
                return np.zeros(0, dtype=np.int64)
            multi = grid.multi_index[indices][:, None, :] + offsets[None, :, :]
            return np.unique(grid.flat_index(multi).ravel())
        parts = [grid.flat_index(grid.multi_index[i] + self.offsets(int(i))) for i in indices]
        return np.unique(np.concatenate(parts)) if parts else np.zeros(0, dtype=np.int64)


def reachable_set(spec: ProblemSpec, grid: TorusGrid, x: int, n_max: Optional[int] = None,
                  settings: Optional[Settings] = None, arrivals: Optional[_Arrivals] = None) -> ReachableSet:
    """Iterate X_{n+1} = X_n union (X_n + supp nu_xi^j) from the cell x until a fixpoint"""
    settings = settings or get_settings()
    arrivals = arrivals or _Arrivals(spec.levy, grid, settings)
    n_max = n_max if n_max is not None else grid.size

    mask = np.zeros(grid.size, dtype=bool)
    mask[x] = True
    result = ReachableSet(int(x), [mask.copy()])
    frontier = np.array([x], dtype=np.int64)
    for _ in range(n_max):
        reached = arrivals.targets(frontier)
        fresh = reached[~mask[reached]]
        if len(fresh) == 0:
            result.fixpoint = True
            break
        mask[fresh] = True
        result.masks.append(mask.copy())
        frontier = fresh
    return result


@dataclass(frozen=True)
class CoveringReport:
    """Covering condition per grid point: B_r0(x) intersect (x + E_0(x)) lies in the reachable closure"""
    passed: bool
    failing_points: int
    checked_points: int
    witness: Dict[str, Any]


def _degenerate_cells(grid: TorusGrid, x: int, basis: np.ndarray, r0: float) -> np.ndarray:
    """Cells within r0 of x whose offset lies within h/2 of x + span(basis)"""
    delta = grid.torus_delta(grid.points[x], grid.points)
    dist = np.linalg.norm(delta, axis=1)
    inside = dist <= r0
    projected = delta @ basis @ basis.T
    near_line = np.linalg.norm(delta - projected, axis=1) <= grid.h / 2.0 + 1e-15
    return np.flatnonzero(inside & near_line)


def covering_check(spec: ProblemSpec, grid: TorusGrid, r0: float, settings: Optional[Settings] = None) -> CoveringReport:
    settings = settings or get_settings()
    arrivals = _Arrivals(spec.levy, grid, settings)
    spaces = spec.diffusion.null_space(grid.points, settings.eigen_threshold)

    translation_closure: Optional[np.ndarray] = None
    failing = 0
    witness: Dict[str, Any] = {}
    for x in range(grid.size):
        basis = spaces[x]
        if basis.shape[1] == 0:
            continue
        cells = _degenerate_cells(grid, x, basis, r0)
        if spec.levy.is_translation:
            if translation_closure is None:
                translation_closure = np.flatnonzero(reachable_set(spec, grid, 0, settings=settings,
                                                                   arrivals=arrivals).closure)
            offsets = grid.multi_index[translation_closure]
            closure = np.zeros(grid.size, dtype=bool)
            closure[grid.flat_index(grid.multi_index[x] + offsets)] = True
        else:
            closure = reachable_set(spec, grid, x, settings=settings, arrivals=arrivals).closure
        missing = cells[~closure[cells]]
        if len(missing):
            failing += 1
            if not witness:
                witness = {"x": float(grid.points[x, 0]) if grid.dimension == 1 else grid.points[x].tolist(),
                           "uncovered": grid.points[missing[0]].tolist(),
                           "uncovered_cells": int(len(missing))}

    passed = failing == 0
    logger.info("Covering check", passed=passed, failing_points=failing, r0=r0)
    return CoveringReport(passed, failing, grid.size, witness)
