"""
Uniform periodic grid on the unit torus and its discrete calculus
Values are stored flat in axis order (C order over the (N,)*d lattice)
"""

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from pathlib import Path
from typing import Callable, Dict, Tuple, Union

import numpy as np
import pandas as pd

from ..core.errors import ConfigurationError, UsageError
from ..core.export import write_csv_atomic

Number = Union[int, float]


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid with N points per axis on [0,1)^d"""
    dimension: int
    points_per_axis: int

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ConfigurationError("grid dimension must be 1 or 2", dimension=self.dimension)
        if self.points_per_axis < 8:
            raise ConfigurationError("grid needs at least 8 points per axis", N=self.points_per_axis)

    @property
    def h(self) -> float:
        return 1.0 / self.points_per_axis

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points_per_axis,) * self.dimension

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.dimension

    @cached_property
    def multi_index(self) -> np.ndarray:
        """Integer lattice coordinates, shape (size, d)"""
        grids = np.indices(self.shape).reshape(self.dimension, -1)
        return np.ascontiguousarray(grids.T)

    @cached_property
    def points(self) -> np.ndarray:
        """Point coordinates i*h, shape (size, d)"""
        return self.multi_index * self.h

    def flat_index(self, multi: np.ndarray) -> np.ndarray:
        """Flatten (…, d) lattice coordinates with periodic wraparound"""
        multi = np.asarray(multi) % self.points_per_axis
        return np.ravel_multi_index(tuple(np.moveaxis(multi, -1, 0)), self.shape)

    def shift(self, values: np.ndarray, axis: int, offset: int) -> np.ndarray:
        """Return v with v[i] = values[i + offset·e_axis] (periodic)"""
        lattice = values.reshape(self.shape)
        return np.roll(lattice, -offset, axis=axis).reshape(-1)

    def mean(self, values: np.ndarray) -> float:
        return float(np.sum(values) / values.size)

    @staticmethod
    def torus_delta(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Componentwise periodic difference y - x wrapped into [-1/2, 1/2)"""
        delta = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
        return delta - np.floor(delta + 0.5)

    @classmethod
    def torus_distance(cls, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Wraparound Euclidean distance, axis by axis min(|dx|, 1 - |dx|)"""
        return np.linalg.norm(cls.torus_delta(x, y), axis=-1)

    def nearest_index(self, points: np.ndarray) -> np.ndarray:
        """Flat index of the grid cell nearest to each point"""
        lattice = np.floor(np.asarray(points) / self.h + 0.5).astype(np.int64)
        return self.flat_index(lattice)

    def interpolation_stencil(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Multilinear periodic interpolation: corner indices and convex weights

        Returns arrays of shape points.shape[:-1] + (2**d,).
        """
        points = np.asarray(points, dtype=float)
        scaled = points / self.h
        base = np.floor(scaled)
        frac = scaled - base
        base = base.astype(np.int64)

        corners = list(product((0, 1), repeat=self.dimension))
        indices = np.empty(points.shape[:-1] + (len(corners),), dtype=np.int64)
        weights = np.empty(points.shape[:-1] + (len(corners),), dtype=float)
        for c, corner in enumerate(corners):
            offset = np.asarray(corner, dtype=np.int64)
            indices[..., c] = self.flat_index(base + offset)
            w = np.ones(points.shape[:-1])
            for axis, bit in enumerate(corner):
                w = w * (frac[..., axis] if bit else 1.0 - frac[..., axis])
            weights[..., c] = w
        return indices, weights

    def interpolation_fractions(self, points: np.ndarray) -> np.ndarray:
        """Fractional cell position per axis, in [0, 1)"""
        scaled = np.asarray(points, dtype=float) / self.h
        return scaled - np.floor(scaled)

    def forward_differences(self, values: np.ndarray) -> np.ndarray:
        columns = [(self.shift(values, a, 1) - values) / self.h for a in range(self.dimension)]
        return np.stack(columns, axis=-1)

    def backward_differences(self, values: np.ndarray) -> np.ndarray:
        columns = [(values - self.shift(values, a, -1)) / self.h for a in range(self.dimension)]
        return np.stack(columns, axis=-1)

    def second_differences(self, values: np.ndarray) -> np.ndarray:
        """Standard 3-point second difference per axis, shape (size, d)"""
        h2 = self.h * self.h
        columns = [
            (self.shift(values, a, 1) - 2.0 * values + self.shift(values, a, -1)) / h2
            for a in range(self.dimension)
        ]
        return np.stack(columns, axis=-1)


@dataclass(frozen=True)
class GridFunction:
    """Finite values of a scalar field on a TorusGrid"""
    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.size != self.grid.size:
            raise ConfigurationError(
                "grid function length does not match grid", length=values.size, expected=self.grid.size
            )
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("grid function has non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: TorusGrid, func: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        """Sample func on the grid points (func receives an (n, d) array)"""
        return cls(grid, np.asarray(func(grid.points), dtype=float).reshape(-1))

    @classmethod
    def constant(cls, grid: TorusGrid, value: float) -> "GridFunction":
        return cls(grid, np.full(grid.size, float(value)))

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(self.grid, values)

    def _check_same_grid(self, other: "GridFunction") -> None:
        if other.grid != self.grid:
            raise UsageError("grid functions live on different grids")

    def __add__(self, other: Union["GridFunction", Number]) -> "GridFunction":
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + float(other))

    __radd__ = __add__

    def __sub__(self, other: Union["GridFunction", Number]) -> "GridFunction":
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - float(other))

    def __neg__(self) -> "GridFunction":
        return self.with_values(-self.values)

    def __mul__(self, scalar: Number) -> "GridFunction":
        return self.with_values(self.values * float(scalar))

    __rmul__ = __mul__

    def exp(self) -> "GridFunction":
        return self.with_values(np.exp(self.values))

    def mean(self) -> float:
        return self.grid.mean(self.values)

    def normalized(self, anchor: int = 0) -> "GridFunction":
        """Shift so that the value at the anchor index is zero"""
        return self.with_values(self.values - self.values[anchor])

    def to_frame(self) -> pd.DataFrame:
        data: Dict[str, np.ndarray] = {"index": np.arange(self.grid.size)}
        for axis in range(self.grid.dimension):
            data[f"x{axis}"] = self.grid.points[:, axis]
        data["value"] = self.values
        return pd.DataFrame(data)

    @classmethod
    def from_frame(cls, grid: TorusGrid, frame: pd.DataFrame) -> "GridFunction":
        ordered = frame.sort_values("index")
        return cls(grid, ordered["value"].to_numpy(dtype=float))

    def write_csv(self, path: Union[str, Path]) -> Path:
        return write_csv_atomic(self.to_frame(), path)


@dataclass(frozen=True)
class UpwindGradients:
    """Forward (D+) and backward (D-) differences, shape (size, d) each"""
    forward: np.ndarray
    backward: np.ndarray

    @property
    def centered(self) -> np.ndarray:
        return 0.5 * (self.forward + self.backward)

    def magnitude_bound(self) -> float:
        """Largest one-sided gradient norm on the grid"""
        fwd = np.linalg.norm(self.forward, axis=-1)
        bwd = np.linalg.norm(self.backward, axis=-1)
        return float(max(fwd.max(initial=0.0), bwd.max(initial=0.0)))


@dataclass(frozen=True)
class FieldMetrics:
    osc: float
    sup_norm: float
    lipschitz: float

    def as_dict(self) -> Dict[str, float]:
        return {"osc": self.osc, "sup_norm": self.sup_norm, "lipschitz": self.lipschitz}


def upwind_gradients(u: Union[GridFunction, np.ndarray], grid: TorusGrid = None) -> UpwindGradients:
    """One-sided differences per axis with periodic wraparound"""
    if isinstance(u, GridFunction):
        grid, values = u.grid, u.values
    else:
        if grid is None:
            raise UsageError("raw arrays need an explicit grid")
        values = u
    return UpwindGradients(grid.forward_differences(values), grid.backward_differences(values))


def metrics_of(values: np.ndarray, grid: TorusGrid) -> FieldMetrics:
    """osc, sup-norm and nearest-neighbour discrete Lipschitz constant"""
    forward = grid.forward_differences(values)
    return FieldMetrics(
        osc=float(values.max() - values.min()),
        sup_norm=float(np.abs(values).max()),
        lipschitz=float(np.abs(forward).max()),
    )


def metrics(u: GridFunction) -> FieldMetrics:
    return metrics_of(u.values, u.grid)
