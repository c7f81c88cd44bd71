from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator

from app.models import ComplexArray
from app.schemas.requests import ExperimentConfig


class BaseResponse(BaseModel):
    model_config = ConfigDict(from_attributes=True, arbitrary_types_allowed=True)


class TrialResult(BaseResponse):
    trial: int
    degree: int
    roots: ComplexArray = Field(default_factory=lambda: np.empty(0, dtype=np.complex128), exclude=True)
    ks: float | None = None
    angular_discrepancy: float | None = None
    annulus_fractions: list[float] = []
    residual_max: float | None = None
    residual_median: float | None = None
    iterations: int = 0
    failed: bool = False
    error: str | None = None

    @field_validator("roots", mode="before")
    @classmethod
    def roots_array(cls, value: Any) -> np.ndarray:
        return np.asarray(value, dtype=np.complex128)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def root_count(self) -> int:
        return int(self.roots.shape[0])


class Report(BaseResponse):
    config: ExperimentConfig
    plan_N_n: int
    plan_D_n: int
    log_rescale: float = 0.0
    trials: list[TrialResult]
    pooled_ks: float | None = None
    per_trial_ks: list[float | None] = []
    angular_discrepancy: float | None = None
    kuiper_pvalue: float | None = None
    annulus_fractions: dict[str, float] = {}
    failed_trials: list[int] = []
    pooled_root_count: int = 0
    runtime_seconds: float = 0.0

    @property
    def successful(self) -> list[TrialResult]:
        return [t for t in self.trials if not t.failed]


class FitReport(BaseResponse):
    ensemble: str
    profile: str
    n: list[int]
    N_n: list[int]
    sup_deviation: list[float]
    eta: list[float]
    log_b: list[float]


class FixedDegreeReport(BaseResponse):
    ensemble: str
    m: int
    seed: int
    n: list[int]
    max_pairing_distance: list[float]
    limit_roots: list[tuple[float, float]]


class SimulateSummary(BaseResponse):
    """One stdout line per degree of a simulate or compare run."""

    n: int
    N_n: int
    D_n: int
    pooled_ks: float | None = None
    angular_discrepancy: float | None = None
    annulus_fractions: dict[str, float] = {}
    failed_trials: list[int] = []
    summary: str | None = None
