"""
Immutable problem instances: coefficients, Hamiltonian and Levy data
Everything here is evaluated on arrays of torus points of shape (n, d)
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Dict, Optional, Tuple

import numpy as np
import structlog

from ..core.errors import ConfigurationError
from .models import (
    DiffusionConfig,
    DiffusionFamily,
    FieldFamily,
    HamiltonianConfig,
    JumpConfig,
    JumpFamily,
    LevyConfig,
    LevyFamily,
    PeriodicFieldConfig,
    ProblemConfig,
)

logger = structlog.get_logger(__name__)

TWO_PI = 2.0 * np.pi

# Dense sampling used for extrema of fields without closed forms
_EXTREMA_SAMPLES = 4096


@dataclass(frozen=True)
class PeriodicField:
    """Scalar 1-periodic field depending on one coordinate"""
    family: FieldFamily = FieldFamily.CONSTANT
    offset: float = 0.0
    amplitude: float = 0.0
    wavenumber: int = 1
    axis: int = 0
    seed: int = 0
    modes: int = 3

    @classmethod
    def from_config(cls, config: PeriodicFieldConfig) -> "PeriodicField":
        return cls(**config.model_dump())

    @classmethod
    def constant(cls, value: float) -> "PeriodicField":
        return cls(FieldFamily.CONSTANT, offset=float(value))

    @cached_property
    def _fourier_coefficients(self) -> Tuple[np.ndarray, np.ndarray]:
        rng = np.random.default_rng(self.seed)
        k = np.arange(1, self.modes + 1)
        cos_c = rng.standard_normal(self.modes) / k ** 2
        sin_c = rng.standard_normal(self.modes) / k ** 2
        return cos_c, sin_c

    def _profile(self, s: np.ndarray) -> np.ndarray:
        """Shape function of the scalar coordinate s"""
        k = self.wavenumber
        if self.family == FieldFamily.CONSTANT:
            return np.zeros_like(s)
        if self.family == FieldFamily.COSINE:
            return np.cos(TWO_PI * k * s)
        if self.family == FieldFamily.SINE:
            return np.sin(TWO_PI * k * s)
        if self.family == FieldFamily.COSINE_SQUARED:
            return np.cos(TWO_PI * k * s) ** 2
        if self.family == FieldFamily.HAT:
            # height 1 on [0, 1/2], peak at 1/4, zero on the other half period
            r = np.mod(s, 1.0)
            return np.where(r < 0.5, 1.0 - np.abs(4.0 * r - 1.0), 0.0)
        cos_c, sin_c = self._fourier_coefficients
        modes = np.arange(1, self.modes + 1)
        phase = TWO_PI * np.multiply.outer(s, modes)
        return np.cos(phase) @ cos_c + np.sin(phase) @ sin_c

    def _profile_derivative(self, s: np.ndarray) -> np.ndarray:
        k = self.wavenumber
        if self.family == FieldFamily.CONSTANT:
            return np.zeros_like(s)
        if self.family == FieldFamily.COSINE:
            return -TWO_PI * k * np.sin(TWO_PI * k * s)
        if self.family == FieldFamily.SINE:
            return TWO_PI * k * np.cos(TWO_PI * k * s)
        if self.family == FieldFamily.COSINE_SQUARED:
            return -TWO_PI * k * np.sin(2.0 * TWO_PI * k * s)
        if self.family == FieldFamily.HAT:
            r = np.mod(s, 1.0)
            return np.where(r < 0.25, 4.0, np.where(r < 0.5, -4.0, 0.0))
        cos_c, sin_c = self._fourier_coefficients
        modes = np.arange(1, self.modes + 1)
        phase = TWO_PI * np.multiply.outer(s, modes)
        return (-np.sin(phase) * modes * TWO_PI) @ cos_c + (np.cos(phase) * modes * TWO_PI) @ sin_c

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        return self.offset + self.amplitude * self._profile(x[:, self.axis])

    def derivative(self, x: np.ndarray) -> np.ndarray:
        """Derivative along the field's axis"""
        x = np.atleast_2d(x)
        return self.amplitude * self._profile_derivative(x[:, self.axis])

    @cached_property
    def _profile_range(self) -> Tuple[float, float]:
        if self.family == FieldFamily.CONSTANT:
            return 0.0, 0.0
        if self.family in (FieldFamily.COSINE, FieldFamily.SINE):
            return -1.0, 1.0
        if self.family in (FieldFamily.COSINE_SQUARED, FieldFamily.HAT):
            return 0.0, 1.0
        s = np.arange(_EXTREMA_SAMPLES) / _EXTREMA_SAMPLES
        values = self._profile(s)
        return float(values.min()), float(values.max())

    @property
    def min_value(self) -> float:
        lo, hi = self._profile_range
        return self.offset + min(self.amplitude * lo, self.amplitude * hi)

    @property
    def max_value(self) -> float:
        lo, hi = self._profile_range
        return self.offset + max(self.amplitude * lo, self.amplitude * hi)

    @property
    def lipschitz(self) -> float:
        amp = abs(self.amplitude)
        if self.family == FieldFamily.CONSTANT:
            return 0.0
        if self.family in (FieldFamily.COSINE, FieldFamily.SINE, FieldFamily.COSINE_SQUARED):
            return TWO_PI * self.wavenumber * amp
        if self.family == FieldFamily.HAT:
            return 4.0 * amp
        cos_c, sin_c = self._fourier_coefficients
        modes = np.arange(1, self.modes + 1)
        return float(amp * TWO_PI * np.sum(modes * np.hypot(cos_c, sin_c)))


def spectral_norm(matrices: np.ndarray) -> np.ndarray:
    """Operator 2-norm of a stack of matrices, shape (n, d, k) -> (n,)"""
    return np.linalg.norm(matrices, ord=2, axis=(-2, -1))


@dataclass(frozen=True)
class DiffusionFactor:
    """sigma(x) as a d x k matrix field with declared Lipschitz bound"""
    dimension: int
    sigma: Callable[[np.ndarray], np.ndarray]
    lipschitz_bound: float
    family: str = "custom"

    def matrix(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.sigma(np.atleast_2d(x)), dtype=float)

    def covariance(self, x: np.ndarray) -> np.ndarray:
        """A(x) = sigma sigma^T, shape (n, d, d)"""
        s = self.matrix(x)
        return s @ np.swapaxes(s, -1, -2)

    def scalar_coefficient(self, x: np.ndarray) -> np.ndarray:
        """Trace of A(x); the full coefficient when d = 1"""
        return np.trace(self.covariance(x), axis1=-2, axis2=-1)

    def null_space(self, x: np.ndarray, threshold: float = 1e-10) -> list:
        """E_0(x): orthonormal basis of ker A(x) per point, each of shape (d, r)"""
        eigenvalues, vectors = np.linalg.eigh(self.covariance(x))
        return [vectors[i][:, eigenvalues[i] <= threshold] for i in range(len(eigenvalues))]

    @property
    def is_zero(self) -> bool:
        return self.family == DiffusionFamily.ZERO.value


def build_diffusion(config: DiffusionConfig, dimension: int) -> DiffusionFactor:
    s, k, axis = config.scale, config.wavenumber, config.axis
    eye = np.eye(dimension)

    if config.family == DiffusionFamily.ZERO:
        return DiffusionFactor(dimension, lambda x: np.zeros((len(x), dimension, dimension)), 0.0, "zero")

    if config.family == DiffusionFamily.CONSTANT:
        sigma = lambda x: np.broadcast_to(s * eye, (len(x), dimension, dimension)).copy()
        default_bound = s
    elif config.family == DiffusionFamily.SINE:
        sigma = lambda x: np.sin(TWO_PI * k * x[:, axis])[:, None, None] * (s * eye)
        default_bound = max(s, TWO_PI * k * s)
    else:
        def sigma(x):
            a = s * (1.0 + np.cos(TWO_PI * k * x[:, axis]) ** 2)
            return np.sqrt(a)[:, None, None] * eye
        # sup sqrt(2s); |d/dx sqrt(a)| <= |a'| / (2 sqrt(s)) <= pi k sqrt(s)
        default_bound = max(np.sqrt(2.0 * s), np.pi * k * np.sqrt(s))

    bound = config.lipschitz_bound if config.lipschitz_bound is not None else default_bound
    return DiffusionFactor(dimension, sigma, float(bound), config.family.value)


@dataclass(frozen=True)
class Hamiltonian:
    """Coercive Hamiltonian with its declared structural constants

    The builtin family is a(x)|p|^m - f(x). Custom Hamiltonians supply
    `evaluate(x, p)` and optionally `gradient(x, p)`.
    """
    exponent: float
    a: PeriodicField
    f: PeriodicField
    b_m: float
    K: float
    L_H: float
    C_zeta: Optional[float]
    H_0: float
    eta: float
    family: str = "power_coercive"
    evaluate: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    gradient: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.exponent <= 1.0:
            raise ConfigurationError("Hamiltonian exponent must exceed 1", exponent=self.exponent)
        if self.evaluate is None and self.a.min_value <= 0.0:
            raise ConfigurationError("power_coercive needs a(x) >= a_min > 0", a_min=self.a.min_value)

    def __call__(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        x, p = np.atleast_2d(x), np.atleast_2d(p)
        if self.evaluate is not None:
            return np.asarray(self.evaluate(x, p), dtype=float)
        norm = np.linalg.norm(p, axis=-1)
        return self.a(x) * norm ** self.exponent - self.f(x)

    def gradient_p(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        """D_p H, shape (n, d)"""
        x, p = np.atleast_2d(x), np.atleast_2d(p)
        if self.gradient is not None:
            return np.asarray(self.gradient(x, p), dtype=float)
        if self.evaluate is not None:
            step = 1e-6
            columns = []
            for axis in range(p.shape[1]):
                e = np.zeros(p.shape[1])
                e[axis] = step
                columns.append((self(x, p + e) - self(x, p - e)) / (2.0 * step))
            return np.stack(columns, axis=-1)
        norm = np.linalg.norm(p, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            scale = np.where(norm > 0.0, norm ** (self.exponent - 2.0), 0.0)
        return (self.a(x) * self.exponent * scale)[:, None] * p

    def rest_bound(self, points: np.ndarray) -> float:
        """H_0 used by the sup bounds and barriers: max of the declared value and sup |H(x, 0)| over points"""
        points = np.atleast_2d(points)
        at_rest = self(points, np.zeros_like(points))
        return max(self.H_0, float(np.abs(at_rest).max()))

    def gradient_bound(self, x: np.ndarray, radius: float) -> np.ndarray:
        """sup over |p| <= radius of |D_p H(x, p)|, per point"""
        x = np.atleast_2d(x)
        if self.evaluate is None:
            return self.a(x) * self.exponent * radius ** (self.exponent - 1.0)
        # custom: sample the sphere of each radius on a coarse shell grid
        d = x.shape[1]
        angles = np.linspace(0.0, TWO_PI, 16, endpoint=False)
        directions = np.stack([np.cos(angles), np.sin(angles)], axis=-1) if d == 2 else np.array([[1.0], [-1.0]])
        bound = np.zeros(len(x))
        for r in np.linspace(0.0, radius, 9)[1:]:
            for direction in directions:
                p = np.broadcast_to(r * direction, (len(x), d))
                bound = np.maximum(bound, np.linalg.norm(self.gradient_p(x, p), axis=-1))
        return bound

    def zeta(self, r: np.ndarray) -> np.ndarray:
        if self.C_zeta is None:
            raise ConfigurationError("Hamiltonian declares no modulus zeta")
        return self.C_zeta * np.asarray(r)


def build_hamiltonian(config: HamiltonianConfig) -> Hamiltonian:
    m = config.exponent
    a = PeriodicField.from_config(config.a)
    f = PeriodicField.from_config(config.f)
    if a.min_value <= 0.0:
        raise ConfigurationError("hamiltonian.a must stay positive", a_min=a.min_value)

    b_m = config.b_m if config.b_m is not None else a.min_value * (m - 1.0)
    K = config.K if config.K is not None else max(0.0, -f.min_value)
    L_H = config.L_H if config.L_H is not None else max(a.lipschitz, f.lipschitz)
    C_zeta = config.C_zeta if config.C_zeta is not None else a.max_value * m * max(1.0, 2.0 ** (m - 2.0))
    H_0 = config.H_0 if config.H_0 is not None else max(abs(f.min_value), abs(f.max_value))
    eta = config.eta if config.eta is not None else (b_m / 2.0 if b_m > 0 else 0.5)
    return Hamiltonian(m, a, f, b_m, K, L_H, C_zeta, H_0, eta)


def _power_integral(r0: np.ndarray, r1: np.ndarray, e: float) -> np.ndarray:
    """Integral of r^e over [r0, r1]"""
    r0, r1 = np.asarray(r0, dtype=float), np.asarray(r1, dtype=float)
    if abs(e + 1.0) < 1e-14:
        return np.log(r1 / r0)
    with np.errstate(divide="ignore"):
        return (r1 ** (e + 1.0) - r0 ** (e + 1.0)) / (e + 1.0)


@dataclass(frozen=True)
class LevyData:
    """Levy measure nu and jump map j(x, z) = g(x) z

    Radial quantities integrate nu over annuli {r0 < |z| <= r1}.
    """
    dimension: int
    family: LevyFamily
    order: Optional[float] = None
    intensity: float = 1.0
    radius: float = 0.5
    mass: float = 1.0
    atoms: Tuple[Tuple[Tuple[float, ...], float], ...] = ()
    jump_family: JumpFamily = JumpFamily.TRANSLATION
    g: PeriodicField = field(default_factory=lambda: PeriodicField.constant(1.0))
    C_nu: Optional[float] = None
    C_j: Optional[float] = None
    C_a: Optional[Dict[float, float]] = None

    def __post_init__(self):
        if self.family == LevyFamily.FRACTIONAL:
            if self.order is None or not 0.0 < self.order < 2.0:
                raise ConfigurationError("fractional order must lie in (0, 2)", order=self.order)
        if self.family == LevyFamily.FINITE and self.mass < 0:
            raise ConfigurationError("negative density", mass=self.mass)
        if any(m < 0 for _, m in self.atoms):
            raise ConfigurationError("negative atom mass")
        if self.jump_family == JumpFamily.MODULATED and self.g.min_value <= 0.0:
            raise ConfigurationError("modulated jumps need g_min > 0", g_min=self.g.min_value)

    @property
    def is_active(self) -> bool:
        if self.family == LevyFamily.NONE:
            return False
        if self.family == LevyFamily.ATOMIC:
            return any(m > 0 for _, m in self.atoms)
        return True

    @property
    def is_translation(self) -> bool:
        return self.jump_family == JumpFamily.TRANSLATION or (
            self.g.family == FieldFamily.CONSTANT and self.g.offset == 1.0
        )

    @property
    def sphere_area(self) -> float:
        return 2.0 if self.dimension == 1 else TWO_PI

    def _ball_volume(self, r: np.ndarray) -> np.ndarray:
        return 2.0 * r if self.dimension == 1 else np.pi * r ** 2

    @property
    def finite_density(self) -> float:
        return self.mass / float(self._ball_volume(np.asarray(self.radius)))

    def atom_radii(self) -> Tuple[np.ndarray, np.ndarray]:
        if not self.atoms:
            return np.zeros(0), np.zeros(0)
        z = np.array([a[0] for a in self.atoms], dtype=float)
        return np.linalg.norm(z, axis=-1), np.array([a[1] for a in self.atoms], dtype=float)

    def radial_moment(self, r0, r1, power: float = 0.0) -> np.ndarray:
        """Integral of |z|^power nu(dz) over r0 < |z| <= r1"""
        r0, r1 = np.asarray(r0, dtype=float), np.asarray(r1, dtype=float)
        d = self.dimension
        if self.family == LevyFamily.FRACTIONAL:
            return self.sphere_area * self.intensity * _power_integral(r0, r1, power - 1.0 - self.order)
        if self.family == LevyFamily.FINITE:
            lo, hi = np.minimum(r0, self.radius), np.minimum(r1, self.radius)
            return self.sphere_area * self.finite_density * _power_integral(lo, hi, power + d - 1.0)
        if self.family == LevyFamily.ATOMIC:
            radii, masses = self.atom_radii()
            inside = (radii[None, :] > np.reshape(r0, (-1, 1))) & (radii[None, :] <= np.reshape(r1, (-1, 1)))
            totals = (inside * masses * np.where(radii > 0, radii, 0.0) ** power).sum(axis=1)
            return totals.reshape(np.broadcast(r0, r1).shape)
        return np.zeros(np.broadcast(r0, r1).shape)

    def radial_mass(self, r0, r1) -> np.ndarray:
        return self.radial_moment(r0, r1, 0.0)

    def inner_second_moment(self, delta: float) -> float:
        """Integral of |z|^2 nu(dz) over |z| < delta"""
        if self.family == LevyFamily.FRACTIONAL:
            s = self.order
            return float(self.sphere_area * self.intensity * delta ** (2.0 - s) / (2.0 - s))
        if self.family == LevyFamily.FINITE:
            r = min(delta, self.radius)
            d = self.dimension
            return float(self.sphere_area * self.finite_density * r ** (d + 2) / (d + 2))
        if self.family == LevyFamily.ATOMIC:
            radii, masses = self.atom_radii()
            return float(np.sum(np.where(radii < delta, masses * radii ** 2, 0.0)))
        return 0.0

    def inner_second_moment_tensor(self, delta: float) -> np.ndarray:
        """Integral of z z^T nu(dz) over |z| < delta, shape (d, d)"""
        d = self.dimension
        if self.family == LevyFamily.ATOMIC:
            tensor = np.zeros((d, d))
            for z, mass in self.atoms:
                z = np.asarray(z, dtype=float)
                if 0.0 < np.linalg.norm(z) < delta:
                    tensor += mass * np.outer(z, z)
            return tensor
        # rotation invariant families
        return self.inner_second_moment(delta) / d * np.eye(d)

    def tail_mass(self, radius: float) -> float:
        """nu({|z| > radius})"""
        if self.family == LevyFamily.FRACTIONAL:
            return float(self.sphere_area * self.intensity * radius ** (-self.order) / self.order)
        if self.family == LevyFamily.FINITE:
            return float(self.radial_mass(min(radius, self.radius), self.radius))
        if self.family == LevyFamily.ATOMIC:
            radii, masses = self.atom_radii()
            return float(np.sum(np.where(radii > radius, masses, 0.0)))
        return 0.0

    @property
    def outer_radius(self) -> float:
        """Radius beyond which nu vanishes (infinite for heavy tails)"""
        if self.family == LevyFamily.FINITE:
            return self.radius
        if self.family == LevyFamily.ATOMIC:
            radii, _ = self.atom_radii()
            return float(radii.max(initial=0.0))
        if self.family == LevyFamily.NONE:
            return 0.0
        return float("inf")

    def jump_scale(self, x: np.ndarray) -> np.ndarray:
        """g(x) such that j(x, z) = g(x) z"""
        x = np.atleast_2d(x)
        if self.jump_family == JumpFamily.TRANSLATION:
            return np.ones(len(x))
        return self.g(x)

    def jump(self, x: np.ndarray, z: np.ndarray) -> np.ndarray:
        return self.jump_scale(x)[:, None] * np.atleast_2d(z)

    @property
    def scale_range(self) -> Tuple[float, float, float]:
        """(g_min, g_max, Lip g)"""
        if self.jump_family == JumpFamily.TRANSLATION:
            return 1.0, 1.0, 0.0
        return self.g.min_value, self.g.max_value, self.g.lipschitz

    @property
    def declared_C_j(self) -> float:
        if self.C_j is not None:
            return self.C_j
        _, g_max, lip = self.scale_range
        return max(g_max, lip)

    def outer_first_moment(self, a: float) -> float:
        """Integral of |z| nu(dz) over |z| > a, infinite when the tail is too heavy"""
        if self.family == LevyFamily.FRACTIONAL:
            s = self.order
            if s <= 1.0:
                return float("inf")
            return float(self.sphere_area * self.intensity * a ** (1.0 - s) / (s - 1.0))
        if self.family == LevyFamily.FINITE:
            return float(self.radial_moment(a, self.radius, 1.0)) if a < self.radius else 0.0
        if self.family == LevyFamily.ATOMIC:
            return float(self.radial_moment(a, np.inf, 1.0))
        return 0.0

    def declared_C_a(self, a: float) -> float:
        """C_a from the declared table, else Lip(g) * int_{|z|>a} |z| nu (inf when no constant exists)"""
        if self.C_a is not None and a in self.C_a:
            return self.C_a[a]
        _, _, lip = self.scale_range
        if lip == 0.0:
            return 0.0
        return lip * self.outer_first_moment(a)

    def declared_C_nu(self) -> float:
        """Declared bound for int 1 ^ |z|^2 nu, default the analytic value"""
        if self.C_nu is not None:
            return self.C_nu
        return self.inner_second_moment(1.0) + self.tail_mass(1.0)


def build_levy(levy: LevyConfig, jump: JumpConfig, dimension: int) -> LevyData:
    atoms = tuple((tuple(a.z), a.mass) for a in levy.atoms)
    return LevyData(
        dimension=dimension,
        family=levy.family,
        order=levy.order,
        intensity=levy.intensity,
        radius=levy.radius,
        mass=levy.mass,
        atoms=atoms,
        jump_family=jump.family,
        g=PeriodicField.from_config(jump.g),
        C_nu=levy.C_nu,
        C_j=jump.C_j,
        C_a=dict(jump.C_a) if jump.C_a is not None else None,
    )


@dataclass(frozen=True)
class ProblemSpec:
    """lambda u - Tr(A D^2 u) - I^j u + H(x, Du) = 0 and its parabolic version on T^d"""
    dimension: int
    discount: float
    diffusion: DiffusionFactor
    hamiltonian: Hamiltonian
    levy: LevyData
    initial: Optional[PeriodicField] = None
    initial_lipschitz: Optional[float] = None
    name: str = "custom"

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ConfigurationError("dimension must be 1 or 2", dimension=self.dimension)
        if self.discount < 0:
            raise ConfigurationError("discount must be nonnegative", discount=self.discount)
        if self.diffusion.dimension != self.dimension or self.levy.dimension != self.dimension:
            raise ConfigurationError("component dimensions disagree", dimension=self.dimension)

    def with_discount(self, discount: float) -> "ProblemSpec":
        return replace(self, discount=float(discount))

    def with_initial(self, initial: PeriodicField) -> "ProblemSpec":
        return replace(self, initial=initial, initial_lipschitz=initial.lipschitz)

    def require_initial(self) -> PeriodicField:
        if self.initial is None:
            raise ConfigurationError("evolution requested without initial data", problem=self.name)
        return self.initial


def build_problem(config: ProblemConfig) -> ProblemSpec:
    """Turn a validated problem section into a ProblemSpec"""
    d = config.dimension
    initial = PeriodicField.from_config(config.initial) if config.initial is not None else None
    spec = ProblemSpec(
        dimension=d,
        discount=config.discount,
        diffusion=build_diffusion(config.diffusion, d),
        hamiltonian=build_hamiltonian(config.hamiltonian),
        levy=build_levy(config.levy, config.jump, d),
        initial=initial,
        initial_lipschitz=(config.initial_lipschitz if config.initial_lipschitz is not None
                           else (initial.lipschitz if initial is not None else None)),
        name=config.name,
    )
    logger.debug("Problem built", name=spec.name, dimension=d, levy=spec.levy.family.value,
                 diffusion=spec.diffusion.family)
    return spec


def custom_hamiltonian(evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray],
                       exponent: float,
                       b_m: float,
                       K: float,
                       gradient: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
                       L_H: float = 0.0,
                       C_zeta: Optional[float] = None,
                       H_0: float = 0.0,
                       eta: Optional[float] = None) -> Hamiltonian:
    """Hamiltonian given by callables, for library use"""
    return Hamiltonian(
        exponent=exponent,
        a=PeriodicField.constant(1.0),
        f=PeriodicField.constant(0.0),
        b_m=b_m,
        K=K,
        L_H=L_H,
        C_zeta=C_zeta,
        H_0=H_0,
        eta=eta if eta is not None else max(b_m / 2.0, 1e-12),
        family="custom",
        evaluate=evaluate,
        gradient=gradient,
    )
