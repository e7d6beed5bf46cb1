"""
Library-wide numerical defaults for levylab
Experiment documents override these per run; nothing is read from the environment
"""

from functools import lru_cache
from typing import Tuple, Type

from pydantic import Field
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict


class Settings(BaseSettings):
    """Numerical defaults shared by checkers, operators and solvers"""

    model_config = SettingsConfigDict(frozen=True, extra="forbid")

    # Assumption sampling
    check_samples: int = Field(default=2048, ge=16)
    p_max: float = Field(default=50.0, gt=0)
    assumption_tolerance: float = 1e-10
    diffusion_tolerance: float = 1e-12
    levy_quad_resolution: int = Field(default=4096, ge=8)

    # Nonlocal quadrature
    nodes_per_decade: int = Field(default=16, ge=2)
    tail_radius: float = Field(default=10.0, ge=1.0)
    angular_nodes: int = Field(default=12, ge=4)
    tail_closure: bool = True
    support_threshold: float = 1e-14
    exp_guard: float = 700.0

    # Monotone scheme
    cfl_safety: float = Field(default=0.8, gt=0, le=1)
    theta_safety: float = Field(default=1.1, ge=1.0)
    theta_refresh_every: int = Field(default=100, ge=1)
    gradient_margin: float = Field(default=0.1, ge=0)
    gradient_floor: float = Field(default=0.5, ge=0)

    # Evolution
    trace_window: int = Field(default=50, ge=2)
    stationarity_tolerance: float = 1e-9
    stationarity_samples: int = Field(default=10, ge=1)

    # Stationary / ergodic
    stationary_tolerance: float = 1e-8
    stationary_max_steps: int = Field(default=400_000, ge=1)
    residual_check_every: int = Field(default=20, ge=1)
    level_projection: bool = True
    eigen_threshold: float = 1e-10

    # Verdicts
    ordering_tolerance: float = 1e-12
    kappa_tolerance: float = 1e-10

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        # init arguments only: runs are defined by their experiment document
        return (init_settings,)


@lru_cache()
def get_settings() -> Settings:
    """Get cached numerical defaults"""
    return Settings()
