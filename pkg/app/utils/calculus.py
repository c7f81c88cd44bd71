import math
from enum import StrEnum

import numpy as np
from scipy.special import gammaln

from app.core.exceptions import InvalidParameterError
from app.models import DerivativePlan, FloatArray, LogCoefficients


class RescaleKind(StrEnum):
    KAC = "kac"
    ELLIPTIC = "elliptic"


class PlanRule(StrEnum):
    EXPLICIT = "explicit"  # N_n given
    RATIO = "ratio"  # N_n = floor(a n)
    LOG = "log"  # N_n = n - floor(log n)
    FIXED = "fixed"  # D_n = m


def _log_fkn_block(k: FloatArray, plan: DerivativePlan) -> FloatArray:
    return np.asarray(
        gammaln(k + plan.N_n + 1) + gammaln(plan.D_n + 1) - gammaln(k + 1) - gammaln(plan.n + 1)
    )


def log_fkn(k: int, plan: DerivativePlan) -> float:
    """
    log f_{k,n} = log((k + N_n)! D_n! / (k! n!)).

    Args:
        k: index in 0..D_n
        plan: differentiation plan

    Returns:
        Value <= 0, exactly 0 at k = D_n
    """
    if not 0 <= k <= plan.D_n:
        raise InvalidParameterError(f"k must lie in 0..{plan.D_n}, got {k}")
    if k == plan.D_n:
        return 0.0
    return float(_log_fkn_block(np.array([k], dtype=np.float64), plan)[0])


def normalize(coeffs: LogCoefficients) -> LogCoefficients:
    """Shift log-magnitudes so that the largest coefficient has magnitude 1."""
    peak = float(np.max(coeffs.log_mag))
    return LogCoefficients(n=coeffs.n, log_mag=coeffs.log_mag - peak, ensemble_label=coeffs.ensemble_label)


def differentiate(coeffs: LogCoefficients, plan: DerivativePlan) -> LogCoefficients:
    """
    Deterministic part of the N_n-th derivative: log p_{k+N_n,n} + log f_{k,n}, k = 0..D_n.

    The result is normalized (max entry 0). Zeros are invariant under the
    dropped constant.
    """
    if plan.n != coeffs.n:
        raise InvalidParameterError(f"Plan degree {plan.n} does not match coefficient degree {coeffs.n}")
    if plan.N_n == 0:
        return normalize(coeffs)
    k = np.arange(plan.D_n + 1, dtype=np.float64)
    log_mag = coeffs.log_mag[plan.N_n :] + _log_fkn_block(k, plan)
    log_mag[-1] = coeffs.log_mag[-1]  # f_{D_n,n} = 1 exactly
    label = f"{coeffs.ensemble_label}^({plan.N_n})"
    return normalize(LogCoefficients(n=plan.D_n, log_mag=log_mag, ensemble_label=label))


def rescale(coeffs: LogCoefficients, log_h: float) -> LogCoefficients:
    """Coefficients of h^D q(z/h): entry k gains (D - k) log h, zeros are multiplied by h."""
    if log_h == 0:
        return coeffs
    k = np.arange(coeffs.n + 1, dtype=np.float64)
    log_mag = coeffs.log_mag + (coeffs.n - k) * log_h
    return LogCoefficients(n=coeffs.n, log_mag=log_mag, ensemble_label=coeffs.ensemble_label)


def recommended_rescale(kind: RescaleKind | str, plan: DerivativePlan, fixed_degree: bool) -> float:
    """log h of the scaling S_h applied to the derivative zeros."""
    try:
        kind = RescaleKind(kind)
    except ValueError as e:
        raise InvalidParameterError(f"No recommended rescaling for {kind}") from e
    if plan.D_n < 1:
        raise InvalidParameterError("Rescaling needs D_n >= 1")

    log_h = math.log(plan.n) if fixed_degree else math.log(plan.n / plan.D_n)
    return 0.5 * log_h if kind == RescaleKind.ELLIPTIC else log_h


def resolve_plan(n: int, rule: PlanRule | str, value: float | None = None) -> DerivativePlan:
    """
    Turn an N_n rule into a plan for degree n.

    Args:
        n: degree
        rule: explicit (value = N_n), ratio (value = a), log, or fixed (value = m = D_n)
        value: the rule parameter, unused for log

    Returns:
        DerivativePlan with 0 <= N_n < n
    """
    rule = PlanRule(rule)
    if n < 1:
        raise InvalidParameterError(f"Degree must be at least 1, got {n}")

    match rule:
        case PlanRule.EXPLICIT:
            if value is None or value != int(value):
                raise InvalidParameterError(f"Explicit N_n must be an integer, got {value}")
            n_n = int(value)
        case PlanRule.RATIO:
            if value is None or not 0 <= value < 1:
                raise InvalidParameterError(f"Ratio must lie in [0, 1), got {value}")
            n_n = math.floor(value * n)
        case PlanRule.LOG:
            n_n = n - math.floor(math.log(n))
        case PlanRule.FIXED:
            if value is None or value != int(value) or value < 1:
                raise InvalidParameterError(f"Fixed degree must be a positive integer, got {value}")
            n_n = n - int(value)

    if not 0 <= n_n < n:
        raise InvalidParameterError(f"Resolved N_n = {n_n} must satisfy 0 <= N_n < n = {n}")
    return DerivativePlan(n=n, N_n=n_n)
