# Domain types shared by every module.
# All of them are immutable after construction: pydantic models are frozen and
# the numpy arrays they hold are flagged read-only by the validators.
#
# Coefficient magnitudes live in log space. LOG_ZERO (IEEE -inf) encodes a zero
# magnitude and is absorbing under addition with finite numbers.

from collections.abc import Callable
from enum import StrEnum
from typing import Any

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

LOG_ZERO = -np.inf


def _frozen_array(value: Any, dtype: type) -> np.ndarray:
    array = np.array(value, dtype=dtype, copy=True)
    if array.ndim != 1:
        raise ValueError("expected a one-dimensional sequence")
    array.setflags(write=False)
    return array


class DomainModel(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class CoefficientProfile(DomainModel):
    """The function t -> log p(t) with support [0, T0].

    `log_p` must accept a float array. Evaluation goes through `__call__`,
    which applies the support rule so that every value beyond T0 is LOG_ZERO.
    """

    log_p: Callable[[FloatArray], FloatArray]
    T0: float = Field(gt=0)
    label: str

    def __call__(self, t: npt.ArrayLike) -> FloatArray:
        t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if np.any(t_arr < 0):
            raise ValueError("profiles are defined on [0, inf)")
        inside = np.minimum(t_arr, self.T0)
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.asarray(self.log_p(inside), dtype=np.float64)
        values = np.broadcast_to(values, t_arr.shape)
        result: FloatArray = np.where(t_arr > self.T0, LOG_ZERO, values)
        return result

    def at(self, t: float) -> float:
        return float(self(t)[0])


class LogCoefficients(DomainModel):
    n: int = Field(ge=0)
    log_mag: FloatArray
    ensemble_label: str

    @field_validator("log_mag", mode="before")
    @classmethod
    def to_array(cls, value: Any) -> np.ndarray:
        return _frozen_array(value, np.float64)

    @model_validator(mode="after")
    def check_shape(self) -> "LogCoefficients":
        if self.log_mag.shape[0] != self.n + 1:
            raise ValueError(f"log_mag must have n+1 = {self.n + 1} entries, got {self.log_mag.shape[0]}")
        if not np.isfinite(self.log_mag[-1]):
            raise ValueError("leading coefficient must be finite")
        if np.any(np.isnan(self.log_mag)) or np.any(self.log_mag == np.inf):
            raise ValueError("log_mag entries must be finite or LOG_ZERO")
        return self


class SamplerKind(StrEnum):
    COMPLEX_GAUSSIAN = "complex-gaussian"
    REAL_GAUSSIAN = "real-gaussian"
    UNIFORM_UNIT_DISK = "uniform-unit-disk"
    RADEMACHER = "rademacher"
    HEAVY_TAIL_LOG = "heavy-tail-log"


class SamplerSpec(DomainModel):
    kind: SamplerKind = SamplerKind.COMPLEX_GAUSSIAN
    parameters: tuple[float, ...] = ()

    @model_validator(mode="after")
    def check_parameters(self) -> "SamplerSpec":
        if self.kind == SamplerKind.HEAVY_TAIL_LOG:
            if len(self.parameters) > 1:
                raise ValueError("heavy-tail-log takes at most one parameter (alpha)")
            if self.parameters and not 0 < self.parameters[0] <= 1:
                raise ValueError("heavy-tail-log needs 0 < alpha <= 1")
        elif self.parameters:
            raise ValueError(f"sampler {self.kind} takes no parameters")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def violates_log_moment(self) -> bool:
        return self.kind == SamplerKind.HEAVY_TAIL_LOG


class SampledPolynomial(DomainModel):
    log_mag: FloatArray
    xi: ComplexArray
    seed_record: tuple[int, int] = (0, 0)

    @field_validator("log_mag", mode="before")
    @classmethod
    def log_mag_array(cls, value: Any) -> np.ndarray:
        return _frozen_array(value, np.float64)

    @field_validator("xi", mode="before")
    @classmethod
    def xi_array(cls, value: Any) -> np.ndarray:
        return _frozen_array(value, np.complex128)

    @model_validator(mode="after")
    def check_lengths(self) -> "SampledPolynomial":
        if self.log_mag.shape != self.xi.shape:
            raise ValueError("log_mag and xi must have the same length")
        if self.log_mag.shape[0] < 1:
            raise ValueError("a polynomial needs at least one coefficient")
        return self

    @property
    def degree(self) -> int:
        return int(self.log_mag.shape[0] - 1)

    def log_abs(self) -> FloatArray:
        """log|c_k| = log p_k + log|xi_k|, LOG_ZERO where either factor vanishes."""
        with np.errstate(divide="ignore"):
            return np.asarray(self.log_mag + np.log(np.abs(self.xi)), dtype=np.float64)

    def phase(self) -> ComplexArray:
        magnitude = np.abs(self.xi)
        safe = np.where(magnitude > 0, magnitude, 1.0)
        return np.where(magnitude > 0, self.xi / safe, 0.0).astype(np.complex128)

    @classmethod
    def from_coefficients(cls, coefficients: npt.ArrayLike) -> "SampledPolynomial":
        """Wrap plain complex coefficients c_0..c_n (lowest degree first)."""
        c = np.asarray(coefficients, dtype=np.complex128)
        magnitude = np.abs(c)
        with np.errstate(divide="ignore"):
            log_mag = np.where(magnitude > 0, np.log(magnitude), LOG_ZERO)
        xi = np.where(magnitude > 0, c / np.where(magnitude > 0, magnitude, 1.0), 1.0)
        return cls(log_mag=log_mag, xi=xi)


class DerivativePlan(DomainModel):
    n: int = Field(ge=0)
    N_n: int = Field(ge=0)

    @model_validator(mode="after")
    def check_order(self) -> "DerivativePlan":
        if self.N_n > self.n:
            raise ValueError(f"differentiation order {self.N_n} exceeds degree {self.n}")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def D_n(self) -> int:
        return self.n - self.N_n

    @computed_field  # type: ignore[prop-decorator]
    @property
    def ratio(self) -> float:
        return self.N_n / self.n if self.n else 0.0

    @property
    def R_n(self) -> float:
        return self.n / self.D_n if self.D_n else float("inf")


class RootSet(DomainModel):
    roots: ComplexArray
    degree: int = Field(ge=0)
    residuals: FloatArray
    converged: tuple[bool, ...]
    iterations: int = 0

    @field_validator("roots", mode="before")
    @classmethod
    def roots_array(cls, value: Any) -> np.ndarray:
        return _frozen_array(value, np.complex128)

    @field_validator("residuals", mode="before")
    @classmethod
    def residual_array(cls, value: Any) -> np.ndarray:
        return _frozen_array(value, np.float64)

    @model_validator(mode="after")
    def check_cardinality(self) -> "RootSet":
        if self.roots.shape[0] != self.degree:
            raise ValueError(f"expected {self.degree} roots, got {self.roots.shape[0]}")
        if self.residuals.shape[0] != self.degree or len(self.converged) != self.degree:
            raise ValueError("residuals and converged flags must match the root count")
        return self

    @property
    def residual_stats(self) -> tuple[float, float]:
        """(max, median) normalized residual."""
        if self.degree == 0:
            return 0.0, 0.0
        return float(np.max(self.residuals)), float(np.median(self.residuals))


class EmpiricalMeasure(DomainModel):
    """Moduli sorted ascending; angles kept in the same order, in [0, 2pi)."""

    moduli: FloatArray
    angles: FloatArray

    @field_validator("moduli", "angles", mode="before")
    @classmethod
    def as_array(cls, value: Any) -> np.ndarray:
        return _frozen_array(value, np.float64)

    @model_validator(mode="after")
    def check_sorted(self) -> "EmpiricalMeasure":
        if self.moduli.shape != self.angles.shape:
            raise ValueError("moduli and angles must have the same length")
        if np.any(np.diff(self.moduli) < 0):
            raise ValueError("moduli must be sorted ascending")
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def count(self) -> int:
        return int(self.moduli.shape[0])


class RadialCDFKind(StrEnum):
    EMPIRICAL_STEP = "empirical-step"
    THEORETICAL = "theoretical"


class RadialCDF:
    """Monotone r -> mass of the closed disk of radius r.

    `jumps` holds the step points of an empirical CDF (empty for theoretical
    curves); KS evaluates at them.
    """

    def __init__(
        self,
        evaluate: Callable[[FloatArray], FloatArray],
        kind: RadialCDFKind,
        jumps: FloatArray | None = None,
        label: str = "",
    ) -> None:
        self._evaluate = evaluate
        self.kind = kind
        self.jumps = np.empty(0) if jumps is None else np.asarray(jumps, dtype=np.float64)
        self.label = label

    def __call__(self, r: npt.ArrayLike) -> FloatArray:
        r_arr = np.atleast_1d(np.asarray(r, dtype=np.float64))
        return np.clip(np.asarray(self._evaluate(r_arr), dtype=np.float64), 0.0, 1.0)

    def left_limit(self, r: npt.ArrayLike) -> FloatArray:
        r_arr = np.atleast_1d(np.asarray(r, dtype=np.float64))
        return self(np.nextafter(r_arr, -np.inf))

    def __repr__(self) -> str:
        return f"RadialCDF(kind={self.kind.value}, label={self.label!r}, jumps={self.jumps.shape[0]})"


class TransformResult(DomainModel):
    """Legendre-Fenchel transform I(s) = sup_t (s t + log p(t)) sampled on s_grid."""

    s_grid: FloatArray
    values: FloatArray
    argmax: FloatArray
    profile: CoefficientProfile
    evaluator: Callable[[FloatArray], tuple[FloatArray, FloatArray]]

    @field_validator("s_grid", "values", "argmax", mode="before")
    @classmethod
    def as_array(cls, value: Any) -> np.ndarray:
        return _frozen_array(value, np.float64)

    @property
    def profile_label(self) -> str:
        return self.profile.label

    @property
    def spacing(self) -> float:
        return float(self.s_grid[1] - self.s_grid[0])

    def evaluate(self, s: npt.ArrayLike) -> FloatArray:
        """Recompute I at arbitrary points with the same resolution as the grid."""
        values, _ = self.evaluator(np.atleast_1d(np.asarray(s, dtype=np.float64)))
        return values

    def is_convex(self, tolerance: float = 1e-9) -> bool:
        return bool(np.all(np.diff(self.values, 2) >= -tolerance))
