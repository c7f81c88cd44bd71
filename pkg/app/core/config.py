# File with environment variables and general configuration logic.
# Env variables are combined in nested groups like "Rootfind", "Transform" etc.
# So environment variable (case-insensitive) for the root finder tolerance will be "rootfind__tol"
#
# Pydantic priority ordering:
#
# 1. (Most important, will overwrite everything) - environment variables
# 2. `.env` file in root folder of project
# 3. Default values
#
# See https://pydantic-docs.helpmanual.io/usage/settings/
# Note, complex types like lists are read as json-encoded strings,
# e.g. EXPERIMENTS__ANNULI='[[0.9, 1.1], [0.85, 1.15]]'


from functools import lru_cache
from pathlib import Path

from pydantic import BaseModel, Field, computed_field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

PROJECT_DIR = Path(__file__).parent.parent.parent


class Rootfind(BaseModel):
    tol: float = Field(default=1e-12, gt=0)
    max_iterations: int = Field(default=200, ge=1)
    residual_tol: float = Field(default=1e-10, gt=0)
    restart_jitter: float = Field(default=1e-3, gt=0)  # relative perturbation on restart
    chunk_size: int = Field(default=512, ge=1)  # rows of the pairwise matrix per block


class Transform(BaseModel):
    s_min: float = -8.0
    s_max: float = 8.0
    s_points: int = Field(default=2001, ge=3)
    t_resolution: int = Field(default=4001, ge=1000)
    golden_iterations: int = Field(default=40, ge=0)

    @model_validator(mode="after")
    def check_range(self) -> "Transform":
        if self.s_max <= self.s_min:
            raise ValueError("TRANSFORM__S_MAX must be larger than TRANSFORM__S_MIN")
        return self


class Measures(BaseModel):
    ks_grid_lo: float = Field(default=1e-3, gt=0)
    ks_grid_hi: float = Field(default=1e3, gt=0)
    ks_grid_points: int = Field(default=10_000, ge=2)


class Profiles(BaseModel):
    continuity_grid: int = Field(default=10_000, ge=100)


class Experiments(BaseModel):
    workers: int = Field(default=1, ge=1)
    output_dir: Path = Path("results")
    annuli: list[tuple[float, float]] = [(0.9, 1.1)]
    log_level: str = "INFO"


class Settings(BaseSettings):
    rootfind: Rootfind = Rootfind()
    transform: Transform = Transform()
    measures: Measures = Measures()
    profiles: Profiles = Profiles()
    experiments: Experiments = Experiments()

    @computed_field  # type: ignore[prop-decorator]
    @property
    def s_spacing(self) -> float:
        return (self.transform.s_max - self.transform.s_min) / (self.transform.s_points - 1)

    model_config = SettingsConfigDict(
        env_file=f"{PROJECT_DIR}/.env",
        case_sensitive=False,
        env_nested_delimiter="__",
        extra="ignore",
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
