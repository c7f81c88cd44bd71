import math
from collections.abc import Callable
from enum import StrEnum

import numpy as np
import numpy.typing as npt
from scipy.special import gammaln, xlogy

from app.core.config import get_settings
from app.core.exceptions import InvalidParameterError
from app.models import (
    CoefficientProfile,
    FloatArray,
    RadialCDF,
    RadialCDFKind,
    SampledPolynomial,
    TransformResult,
)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
# bound on the size of the (s, t) block evaluated at once
_BLOCK_CELLS = 4_000_000
# exp/log round trips at the grid ends
_GRID_SLACK = 1e-12
# limit_cdf table points per s-grid interval
_CDF_SUBDIVISIONS = 8


class LimitCase(StrEnum):
    KAC_UNIT_CIRCLE = "kac-unit-circle"
    KAC_A = "kac-a"
    KAC_RESCALED = "kac-rescaled"
    ELLIPTIC_RESCALED = "elliptic-rescaled"
    ELLIPTIC_SPHERE = "elliptic-sphere"


class TransformCase(StrEnum):
    KAC = "kac"
    KAC_CASE2 = "kac-case2"
    KAC_CASE3_RESCALED = "kac-case3-rescaled"
    ELLIPTIC_RESCALED = "elliptic-rescaled"
    ELLIPTIC = "elliptic"


class FixedDegreeKind(StrEnum):
    KAC = "kac"
    ELLIPTIC = "elliptic"


def _check_a(a: float | None) -> float:
    if a is None or not 0.0 < a < 1.0:
        raise InvalidParameterError(f"Parameter a must lie in (0, 1), got {a}")
    return float(a)


def derived_profile_u_a(profile: CoefficientProfile, a: float) -> CoefficientProfile:
    """
    Compose a profile with the normalized differentiation weights for N_n/n -> a.

    log u_a(t) = log p(t+a) + (t+a)log(t+a) - t log t + (1-a)log(1-a) on [0, 1-a].

    Args:
        profile: original profile, finite on [a, 1]
        a: limit ratio in (0, 1)

    Returns:
        u_a with T0 = 1 - a
    """
    a = _check_a(a)
    values = profile(np.linspace(a, 1.0, 101))
    if not np.all(np.isfinite(values)):
        raise InvalidParameterError(f"Profile {profile.label} must be finite on [{a}, 1]")
    tail = (1.0 - a) * math.log(1.0 - a)

    def log_u_a(t: FloatArray) -> FloatArray:
        shifted = np.minimum(t + a, 1.0)
        return np.asarray(profile(shifted) + xlogy(shifted, shifted) - xlogy(t, t) + tail)

    return CoefficientProfile(log_p=log_u_a, T0=1.0 - a, label=f"u_{a}({profile.label})")


def _golden_refine(
    profile: CoefficientProfile,
    s: FloatArray,
    lo: FloatArray,
    hi: FloatArray,
    iterations: int,
) -> tuple[FloatArray, FloatArray]:
    """Vectorized golden-section maximization of s t + log p(t) on [lo, hi] per row."""

    def objective(t: FloatArray) -> FloatArray:
        return np.asarray(s * t + profile(t))

    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = objective(c), objective(d)
    for _ in range(iterations):
        keep_left = fc > fd
        hi = np.where(keep_left, d, hi)
        lo = np.where(keep_left, lo, c)
        old_c, old_fc, old_d, old_fd = c, fc, d, fd
        point = np.where(keep_left, hi - INV_PHI * (hi - lo), lo + INV_PHI * (hi - lo))
        f_point = objective(point)
        c = np.where(keep_left, point, old_d)
        fc = np.where(keep_left, f_point, old_fd)
        d = np.where(keep_left, old_c, point)
        fd = np.where(keep_left, old_fc, f_point)
    best_t = np.where(fc >= fd, c, d)
    return np.maximum(fc, fd), best_t


def _make_evaluator(
    profile: CoefficientProfile, t_resolution: int, iterations: int
) -> Callable[[FloatArray], tuple[FloatArray, FloatArray]]:
    t_grid = np.linspace(0.0, profile.T0, t_resolution)
    log_p = profile(t_grid)
    finite = np.isfinite(log_p)
    if not np.any(finite):
        raise InvalidParameterError(f"Profile {profile.label} has empty finite support")
    t_f, log_f = t_grid[finite], log_p[finite]
    last = t_f.shape[0] - 1
    rows_per_block = max(1, _BLOCK_CELLS // t_f.shape[0])

    def evaluate(s: FloatArray) -> tuple[FloatArray, FloatArray]:
        values = np.empty(s.shape[0])
        argmax = np.empty(s.shape[0])
        for start in range(0, s.shape[0], rows_per_block):
            block = s[start : start + rows_per_block]
            scores = block[:, None] * t_f[None, :] + log_f[None, :]
            j = np.argmax(scores, axis=1)
            best = scores[np.arange(block.shape[0]), j]
            best_t = t_f[j]
            if iterations > 0 and last > 0:
                lo = t_f[np.maximum(j - 1, 0)]
                hi = t_f[np.minimum(j + 1, last)]
                refined, refined_t = _golden_refine(profile, block, lo, hi, iterations)
                better = refined > best
                best = np.where(better, refined, best)
                best_t = np.where(better, refined_t, best_t)
            values[start : start + block.shape[0]] = best
            argmax[start : start + block.shape[0]] = best_t
        return values, argmax

    return evaluate


def default_s_grid() -> FloatArray:
    transform = get_settings().transform
    return np.linspace(transform.s_min, transform.s_max, transform.s_points)


def legendre_fenchel(
    profile: CoefficientProfile,
    s_grid: npt.ArrayLike | None = None,
    t_resolution: int | None = None,
) -> TransformResult:
    """
    I(s) = sup_{t >= 0} (s t + log p(t)) on a grid of s.

    The sup is taken over a uniform t-grid on [0, T0] (LOG_ZERO values excluded)
    and refined by golden-section search around the discrete argmax.

    Args:
        profile: coefficient profile
        s_grid: uniform grid of s; defaults to the configured grid on [-8, 8]
        t_resolution: number of t samples, at least 1000
    """
    settings = get_settings().transform
    if t_resolution is None:
        t_resolution = settings.t_resolution
    if t_resolution < 1000:
        raise InvalidParameterError(f"t_resolution must be at least 1000, got {t_resolution}")
    grid = default_s_grid() if s_grid is None else np.asarray(s_grid, dtype=np.float64)
    if grid.ndim != 1 or grid.shape[0] < 3 or np.any(np.diff(grid) <= 0):
        raise InvalidParameterError("s_grid must be increasing with at least three points")

    evaluator = _make_evaluator(profile, t_resolution, settings.golden_iterations)
    values, argmax = evaluator(grid)
    return TransformResult(s_grid=grid, values=values, argmax=argmax, profile=profile, evaluator=evaluator)


def _backward_slope(tr: TransformResult, s0: FloatArray) -> FloatArray:
    h = tr.spacing
    stacked = tr.evaluate(np.concatenate([s0, s0 - h, s0 - 2.0 * h]))
    i0, i1, i2 = np.split(stacked, 3)
    return np.clip((3.0 * i0 - 4.0 * i1 + i2) / (2.0 * h), 0.0, tr.profile.T0)


def limit_radial_cdf(
    tr: TransformResult,
    r: npt.ArrayLike,
    mass_norm: float = 1.0,
) -> FloatArray:
    """
    mu(D_r) = I'(log r) / mass_norm with I' the left derivative.

    The left derivative is a second-order backward difference with step equal to
    the s-grid spacing, using I re-evaluated at log r, log r - h and log r - 2h.
    """
    if mass_norm <= 0:
        raise InvalidParameterError(f"mass_norm must be positive, got {mass_norm}")
    r_arr = np.atleast_1d(np.asarray(r, dtype=np.float64))
    if np.any(r_arr <= 0):
        raise InvalidParameterError("r must be positive")
    s0 = np.log(r_arr)
    s_lo, s_hi = tr.s_grid[0], tr.s_grid[-1]
    if np.any(s0 < s_lo - _GRID_SLACK) or np.any(s0 > s_hi + _GRID_SLACK):
        raise InvalidParameterError(f"r outside the grid range [{math.exp(s_lo):.3g}, {math.exp(s_hi):.3g}]")
    return _backward_slope(tr, np.clip(s0, s_lo, s_hi)) / mass_norm


def limit_cdf(tr: TransformResult, mass_norm: float | None = None) -> RadialCDF:
    """
    Theoretical RadialCDF of a transform; radii beyond the grid use the nearest grid end.

    limit_radial_cdf is tabulated once, on a grid `_CDF_SUBDIVISIONS` times finer
    than the s-grid, and interpolated linearly in log r afterwards.
    """
    norm = tr.profile.T0 if mass_norm is None else mass_norm
    if norm <= 0:
        raise InvalidParameterError(f"mass_norm must be positive, got {norm}")
    intervals = int(round(float(tr.s_grid[-1] - tr.s_grid[0]) / tr.spacing))
    s_table = np.linspace(tr.s_grid[0], tr.s_grid[-1], intervals * _CDF_SUBDIVISIONS + 1)
    cdf_table = _backward_slope(tr, s_table) / norm

    def evaluate(r: FloatArray) -> FloatArray:
        out = np.zeros_like(r)
        positive = r > 0
        if np.any(positive):
            out[positive] = np.interp(np.log(r[positive]), s_table, cdf_table)
        return out

    return RadialCDF(evaluate, RadialCDFKind.THEORETICAL, label=f"transform:{tr.profile_label}")


def closed_form_cdf(case: LimitCase | str, r: npt.ArrayLike, a: float | None = None) -> FloatArray:
    """Exact radial CDFs of the limit measures (probability normalized)."""
    try:
        case = LimitCase(case)
    except ValueError as e:
        raise InvalidParameterError(f"Unknown closed-form case: {case}") from e
    r_arr = np.atleast_1d(np.asarray(r, dtype=np.float64))
    if np.any(r_arr < 0):
        raise InvalidParameterError("r must be nonnegative")

    match case:
        case LimitCase.KAC_UNIT_CIRCLE:
            return np.where(r_arr > 1.0, 1.0, 0.0)
        case LimitCase.KAC_A:
            a = _check_a(a)
            edge = 1.0 - a
            inside = np.minimum(r_arr, edge)
            with np.errstate(divide="ignore", invalid="ignore"):
                value = a * inside / ((1.0 - a) * (1.0 - inside))
            return np.where(r_arr >= edge, 1.0, value)
        case LimitCase.KAC_RESCALED:
            return np.minimum(r_arr, 1.0)
        case LimitCase.ELLIPTIC_RESCALED:
            # r (sqrt(4 + r^2) - r) / 2 without cancellation
            return np.asarray(r_arr / (np.sqrt(4.0 + r_arr**2) + r_arr) * 2.0)
        case LimitCase.ELLIPTIC_SPHERE:
            return np.asarray(r_arr**2 / (1.0 + r_arr**2))


def closed_form_density(case: LimitCase | str, r: npt.ArrayLike, a: float | None = None) -> FloatArray:
    """Planar density at |z| = r, i.e. (d/dr mu(D_r)) / (2 pi r)."""
    case = LimitCase(case)
    r_arr = np.atleast_1d(np.asarray(r, dtype=np.float64))
    if np.any(r_arr <= 0):
        raise InvalidParameterError("density needs r > 0")

    match case:
        case LimitCase.KAC_UNIT_CIRCLE:
            raise InvalidParameterError("the unit circle measure has no planar density")
        case LimitCase.KAC_A:
            a = _check_a(a)
            inside = r_arr < 1.0 - a
            safe = np.where(inside, r_arr, 0.0)
            radial = np.where(inside, a / ((1.0 - a) * (1.0 - safe) ** 2), 0.0)
        case LimitCase.KAC_RESCALED:
            radial = np.where(r_arr <= 1.0, 1.0, 0.0)
        case LimitCase.ELLIPTIC_RESCALED:
            radial = (2.0 + r_arr**2) / np.sqrt(4.0 + r_arr**2) - r_arr
        case LimitCase.ELLIPTIC_SPHERE:
            radial = 2.0 * r_arr / (1.0 + r_arr**2) ** 2
    return np.asarray(radial / (2.0 * np.pi * r_arr))


def closed_form_transform(case: TransformCase | str, s: npt.ArrayLike, a: float | None = None) -> FloatArray:
    """Closed-form Legendre-Fenchel transforms of -log p for the named profiles."""
    case = TransformCase(case)
    s_arr = np.atleast_1d(np.asarray(s, dtype=np.float64))

    match case:
        case TransformCase.KAC:
            return np.maximum(s_arr, 0.0)
        case TransformCase.KAC_CASE2:
            a = _check_a(a)
            edge = math.log(1.0 - a)
            low = np.minimum(s_arr, edge)
            lower_branch = a * np.log(a / np.expm1(-low) + a) + (1.0 - a) * math.log(1.0 - a)
            return np.where(s_arr < edge, lower_branch, s_arr * (1.0 - a))
        case TransformCase.KAC_CASE3_RESCALED:
            return np.where(s_arr < 0.0, np.expm1(np.minimum(s_arr, 0.0)), s_arr)
        case TransformCase.ELLIPTIC_RESCALED:
            x = np.exp(-2.0 * s_arr)
            root = np.sqrt(1.0 + 4.0 * x)
            t_s = 2.0 / (1.0 + root)
            one_minus_t = 4.0 * x / (1.0 + root) ** 2
            return np.asarray(0.5 * (t_s - 1.0) - 0.5 * np.log(one_minus_t))
        case TransformCase.ELLIPTIC:
            return np.asarray(0.5 * np.logaddexp(0.0, 2.0 * s_arr))


def fixed_degree_limit_poly(kind: FixedDegreeKind | str, m: int, xi: npt.ArrayLike) -> SampledPolynomial:
    """f^K_m = sum xi_k z^k / k!  or  f^E_m = sum xi_k z^k / (k! sqrt((m-k)!))."""
    kind = FixedDegreeKind(kind)
    xi_arr = np.asarray(xi, dtype=np.complex128)
    if m < 1:
        raise InvalidParameterError(f"m must be at least 1, got {m}")
    if xi_arr.shape != (m + 1,):
        raise InvalidParameterError(f"xi must have length m+1 = {m + 1}, got {xi_arr.shape[0]}")
    k = np.arange(m + 1, dtype=np.float64)
    log_mag = -gammaln(k + 1)
    if kind == FixedDegreeKind.ELLIPTIC:
        log_mag = log_mag - 0.5 * gammaln(m - k + 1)
    return SampledPolynomial(log_mag=log_mag, xi=xi_arr)
