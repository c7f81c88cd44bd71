from enum import StrEnum
from pathlib import Path
from typing import Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.exceptions import InvalidParameterError
from app.models import DerivativePlan, FloatArray, SamplerSpec
from app.utils.calculus import PlanRule, resolve_plan
from app.utils.limits import LimitCase


class BaseRequest(BaseModel):
    # shared config for every request-like input
    model_config = ConfigDict(frozen=True)


class RescaleMode(StrEnum):
    NONE = "none"
    AUTO = "auto"


class NnRule(BaseRequest):
    rule: PlanRule = PlanRule.EXPLICIT
    value: float | None = 0

    def resolve(self, n: int) -> DerivativePlan:
        return resolve_plan(n, self.rule, self.value)


class TargetKind(StrEnum):
    CLOSED_FORM = "closed-form"
    TRANSFORM = "transform"


class TargetSpec(BaseRequest):
    """
    Comparison target.

    Labels: kac-unit-circle | kac-a:<a> | kac-rescaled | elliptic-rescaled |
    elliptic-sphere | transform:<profile>[@<a>]
    """

    label: str
    kind: TargetKind
    case: LimitCase | None = None
    profile: str | None = None
    a: float | None = None

    @classmethod
    def parse(cls, label: str) -> "TargetSpec":
        try:
            return cls._parse(label)
        except ValueError as e:
            raise InvalidParameterError(f"Invalid target {label}: {e}") from e

    @classmethod
    def _parse(cls, label: str) -> "TargetSpec":
        if label.startswith("transform:"):
            body = label.removeprefix("transform:")
            profile, _, ratio = body.partition("@")
            if not profile:
                raise ValueError(f"Target {label} names no profile")
            return cls(label=label, kind=TargetKind.TRANSFORM, profile=profile, a=float(ratio) if ratio else None)
        name, _, ratio = label.partition(":")
        case = LimitCase(name)
        if case == LimitCase.KAC_A and not ratio:
            raise ValueError("kac-a target needs a ratio, e.g. kac-a:0.5")
        return cls(label=label, kind=TargetKind.CLOSED_FORM, case=case, a=float(ratio) if ratio else None)

    @model_validator(mode="after")
    def check_ratio(self) -> Self:
        if self.a is not None and not 0 < self.a < 1:
            raise ValueError(f"Target ratio must lie in (0, 1), got {self.a}")
        return self


class GridSpec(BaseRequest):
    lo: float = Field(gt=0)
    hi: float
    step: float = Field(gt=0)

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        try:
            lo, hi, step = (float(part) for part in parts)
            return cls(lo=lo, hi=hi, step=step)
        except ValueError as e:
            raise InvalidParameterError(f"Grid {text} is not lo:hi:step with 0 < lo < hi, step > 0") from e

    @model_validator(mode="after")
    def check_order(self) -> Self:
        if self.hi <= self.lo:
            raise ValueError("Grid needs lo < hi")
        return self

    def values(self) -> FloatArray:
        count = int(np.floor((self.hi - self.lo) / self.step + 1e-9)) + 1
        return self.lo + self.step * np.arange(count)


class ExperimentConfig(BaseRequest):
    ensemble: str
    sampler: SamplerSpec = SamplerSpec()
    n: int = Field(ge=1)
    nn_rule: NnRule = NnRule()
    rescale: RescaleMode = RescaleMode.NONE
    trials: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)
    out: Path | None = None
    target: TargetSpec | None = None
    annuli: list[tuple[float, float]] = [(0.9, 1.1)]

    @model_validator(mode="after")
    def check_plan(self) -> Self:
        # raises if the rule yields N_n outside [0, n)
        self.nn_rule.resolve(self.n)
        return self

    @property
    def plan(self) -> DerivativePlan:
        return self.nn_rule.resolve(self.n)
