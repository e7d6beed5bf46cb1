"""
Experiment document schema
YAML documents are validated into these models before any numerics run
"""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import structlog
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..core.errors import ConfigurationError
from .presets import PRESETS, deep_merge

logger = structlog.get_logger(__name__)


class FieldFamily(str, Enum):
    """Builtin periodic scalar fields"""
    CONSTANT = "constant"
    COSINE = "cosine"
    SINE = "sine"
    COSINE_SQUARED = "cosine_squared"
    HAT = "hat"
    FOURIER = "fourier"


class DiffusionFamily(str, Enum):
    ZERO = "zero"
    CONSTANT = "constant"
    SINE = "sine"
    SQUARED_COSINE = "squared_cosine"


class HamiltonianFamily(str, Enum):
    POWER_COERCIVE = "power_coercive"


class LevyFamily(str, Enum):
    NONE = "none"
    FRACTIONAL = "fractional"
    FINITE = "finite"
    ATOMIC = "atomic"


class JumpFamily(str, Enum):
    TRANSLATION = "translation"
    MODULATED = "modulated"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PeriodicFieldConfig(_Strict):
    """offset + amplitude * shape(wavenumber * x[axis])"""
    family: FieldFamily = FieldFamily.CONSTANT
    offset: float = 0.0
    amplitude: float = 0.0
    wavenumber: int = Field(default=1, ge=1)
    axis: int = Field(default=0, ge=0, le=1)
    seed: int = 0
    modes: int = Field(default=3, ge=1, le=32)


class DiffusionConfig(_Strict):
    family: DiffusionFamily = DiffusionFamily.ZERO
    scale: float = Field(default=0.0, ge=0.0)
    wavenumber: int = Field(default=1, ge=1)
    axis: int = Field(default=0, ge=0, le=1)
    lipschitz_bound: Optional[float] = Field(default=None, ge=0.0)


class HamiltonianConfig(_Strict):
    """H(x, p) = a(x)|p|^m - f(x); omitted constants take their analytic defaults"""
    family: HamiltonianFamily = HamiltonianFamily.POWER_COERCIVE
    exponent: float = Field(default=2.0, gt=1.0)
    a: PeriodicFieldConfig = PeriodicFieldConfig(family=FieldFamily.CONSTANT, offset=1.0)
    f: PeriodicFieldConfig = PeriodicFieldConfig()
    b_m: Optional[float] = Field(default=None, ge=0.0)
    K: Optional[float] = Field(default=None, ge=0.0)
    L_H: Optional[float] = Field(default=None, ge=0.0)
    C_zeta: Optional[float] = Field(default=None, ge=0.0)
    H_0: Optional[float] = Field(default=None, ge=0.0)
    eta: Optional[float] = Field(default=None, gt=0.0)


class AtomConfig(_Strict):
    z: List[float]
    mass: float = Field(ge=0.0)


class LevyConfig(_Strict):
    family: LevyFamily = LevyFamily.NONE
    order: Optional[float] = None
    intensity: float = Field(default=1.0, gt=0.0)
    radius: float = Field(default=0.5, gt=0.0)
    mass: float = Field(default=1.0, ge=0.0)
    atoms: List[AtomConfig] = []
    C_nu: Optional[float] = Field(default=None, ge=0.0)

    @field_validator("order")
    @classmethod
    def validate_order(cls, v):
        if v is not None and not 0.0 < v < 2.0:
            raise ValueError(f"order must lie in the open interval (0, 2), got {v}")
        return v

    @model_validator(mode="after")
    def validate_family_parameters(self):
        if self.family == LevyFamily.FRACTIONAL and self.order is None:
            raise ValueError("fractional family needs an order in (0, 2)")
        if self.family == LevyFamily.ATOMIC and not self.atoms:
            raise ValueError("atomic family needs at least one atom")
        return self


class JumpConfig(_Strict):
    family: JumpFamily = JumpFamily.TRANSLATION
    g: PeriodicFieldConfig = PeriodicFieldConfig(family=FieldFamily.CONSTANT, offset=1.0)
    C_j: Optional[float] = Field(default=None, ge=0.0)
    C_a: Optional[Dict[float, float]] = None


class ProblemConfig(_Strict):
    """One equation instance, either spelled out or built from a preset plus overrides"""
    preset: Optional[str] = None
    name: str = "custom"
    dimension: Literal[1, 2] = 1
    discount: float = Field(default=0.0, ge=0.0)
    diffusion: DiffusionConfig = DiffusionConfig()
    hamiltonian: HamiltonianConfig = HamiltonianConfig()
    levy: LevyConfig = LevyConfig()
    jump: JumpConfig = JumpConfig()
    initial: Optional[PeriodicFieldConfig] = None
    initial_lipschitz: Optional[float] = Field(default=None, ge=0.0)

    @model_validator(mode="before")
    @classmethod
    def expand_preset(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("preset") is not None:
            preset = data["preset"]
            if preset not in PRESETS:
                raise ValueError(f"unknown preset '{preset}', expected one of {sorted(PRESETS)}")
            overrides = {k: v for k, v in data.items() if k != "preset"}
            return {"preset": preset, **deep_merge(PRESETS[preset], overrides)}
        return data

    @model_validator(mode="after")
    def validate_axes(self):
        fields = [self.hamiltonian.a, self.hamiltonian.f, self.jump.g]
        if self.initial is not None:
            fields.append(self.initial)
        if any(field.axis >= self.dimension for field in fields) or self.diffusion.axis >= self.dimension:
            raise ValueError("field axis must be smaller than the dimension")
        for atom in self.levy.atoms:
            if len(atom.z) != self.dimension:
                raise ValueError("atom coordinates must match the dimension")
        return self


def default_schedule() -> List[float]:
    return [0.1 * 2.0 ** (-k) for k in range(8)]


class NumericsConfig(_Strict):
    points_per_axis: int = Field(default=128, ge=8)
    nodes_per_decade: int = Field(default=16, ge=2)
    tail_radius: float = Field(default=10.0, ge=1.0)
    tail_closure: bool = True
    cfl_safety: float = Field(default=0.8, gt=0.0, le=1.0)
    tolerance: float = Field(default=1e-8, gt=0.0)
    max_steps: int = Field(default=400_000, ge=1)
    T_final: float = Field(default=10.0, gt=0.0)
    checkpoints: List[float] = [10.0, 25.0, 50.0]
    lambda_schedule: List[float] = Field(default_factory=default_schedule)
    discounts: List[float] = [1.0, 0.1, 0.01]
    check_samples: int = Field(default=2048, ge=16)
    seeds: List[int] = [0, 1, 2]
    anchor_index: int = Field(default=0, ge=0)

    def operator_options(self) -> Dict[str, Any]:
        """Keyword arguments for SchemeOperators.build"""
        return {
            "nodes_per_decade": self.nodes_per_decade,
            "tail_radius": self.tail_radius,
            "tail_closure": self.tail_closure,
            "cfl_safety": self.cfl_safety,
        }

    @field_validator("lambda_schedule")
    @classmethod
    def validate_schedule(cls, v):
        if not v or any(lam <= 0 for lam in v):
            raise ValueError("lambda schedule must be a nonempty list of positive values")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("lambda schedule must be strictly decreasing")
        return v

    @field_validator("discounts")
    @classmethod
    def validate_discounts(cls, v):
        if any(lam <= 0 for lam in v):
            raise ValueError("stationary discounts must be positive")
        return v


class OutputConfig(_Strict):
    directory: str = "results"
    sample_every: int = Field(default=10, ge=1)


Subcommand = Literal["check", "evolve", "stationary", "ergodic", "verify-all"]


class ExperimentConfig(_Strict):
    subcommand: Subcommand
    seed: int = 0
    problem: ProblemConfig = ProblemConfig(preset="eikonal")
    numerics: NumericsConfig = NumericsConfig()
    output: OutputConfig = OutputConfig()


def format_validation_errors(exc: ValidationError) -> List[str]:
    """One 'dotted.key: message' entry per offending key"""
    problems = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"]) or "<document>"
        problems.append(f"{location}: {error['msg']}")
    return problems


def parse_experiment(document: Dict[str, Any]) -> ExperimentConfig:
    """Validate an already-parsed experiment document"""
    try:
        return ExperimentConfig.model_validate(document)
    except ValidationError as e:
        raise ConfigurationError("Invalid experiment configuration", problems=format_validation_errors(e))


def load_experiment(path: Union[str, Path]) -> ExperimentConfig:
    """Read and validate a YAML experiment document"""
    path = Path(path)
    try:
        document = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigurationError(f"Cannot read configuration {path}", path=str(path), reason=str(e))
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Malformed YAML in {path}", path=str(path), reason=str(e))

    if not isinstance(document, dict):
        raise ConfigurationError(f"Configuration {path} must be a mapping", path=str(path))

    config = parse_experiment(document)
    logger.info("Experiment configuration loaded", path=str(path), subcommand=config.subcommand,
                problem=config.problem.name)
    return config
