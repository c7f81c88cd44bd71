import math
from collections.abc import Sequence
from enum import StrEnum
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, xlogy

from app.core.config import get_settings
from app.core.exceptions import InvalidParameterError
from app.models import (
    LOG_ZERO,
    CoefficientProfile,
    FloatArray,
    LogCoefficients,
    SampledPolynomial,
    SamplerKind,
    SamplerSpec,
)
from app.utils.limits import derived_profile_u_a

# log|xi| above this is not representable once exponentiated
HEAVY_TAIL_CAP = 700.0


class ProfileKind(StrEnum):
    KAC = "kac"
    ELLIPTIC = "elliptic"
    KAC_CASE2 = "kac-case2"
    KAC_CASE3_RESCALED = "kac-case3-rescaled"
    ELLIPTIC_RESCALED = "elliptic-rescaled"
    CUSTOM = "custom"


class EnsembleKind(StrEnum):
    KAC = "kac"
    ELLIPTIC = "elliptic"
    COUNTEREXAMPLE = "counterexample"
    PROFILE_DRIVEN = "profile-driven"


class EnsembleDiagnostics(NamedTuple):
    eta: float
    log_b: float


def _log_kac(t: FloatArray) -> FloatArray:
    return np.zeros_like(t)


def _log_elliptic(t: FloatArray) -> FloatArray:
    return np.asarray(-0.5 * xlogy(t, t) - 0.5 * xlogy(1.0 - t, 1.0 - t))


def _log_kac_case3(t: FloatArray) -> FloatArray:
    return np.asarray(t - 1.0 - xlogy(t, t))


def _log_elliptic_rescaled(t: FloatArray) -> FloatArray:
    return np.asarray(0.5 * (t - 1.0) - 0.5 * xlogy(1.0 - t, 1.0 - t) - xlogy(t, t))


def _check_ratio(a: float | None) -> float:
    if a is None or not 0.0 < a < 1.0:
        raise InvalidParameterError(f"Parameter a must lie in (0, 1), got {a}")
    return float(a)


def kac_case2_f1(a: float) -> CoefficientProfile:
    """log f_1(t) = (t+a)log(t+a) - t log t + (1-a)log(1-a), unrestricted on [0, 1]."""
    a = _check_ratio(a)

    def log_f1(t: FloatArray) -> FloatArray:
        return np.asarray(xlogy(t + a, t + a) - xlogy(t, t) + (1.0 - a) * math.log(1.0 - a))

    return CoefficientProfile(log_p=log_f1, T0=1.0, label=f"kac-f1({a})")


def load_profile_table(path: str | Path) -> CoefficientProfile:
    """
    Read a two-column text table (t, log p(t)) and interpolate it linearly.

    Args:
        path: whitespace or comma separated file, '#' comments allowed

    Returns:
        Profile with T0 equal to the last t of the table
    """
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as e:
        raise InvalidParameterError(f"Cannot read profile table {path}: {e}") from e
    table = np.loadtxt(raw.replace(",", " ").splitlines(), ndmin=2)
    if table.shape[1] != 2 or table.shape[0] < 2:
        raise InvalidParameterError(f"Profile table {path} needs at least two rows of (t, log p)")
    t_col, log_col = table[:, 0], table[:, 1]
    if t_col[0] != 0.0:
        raise InvalidParameterError(f"Profile table {path} must start at t = 0")
    if np.any(np.diff(t_col) <= 0):
        raise InvalidParameterError(f"Profile table {path} must be strictly increasing in t")
    if not np.all(np.isfinite(log_col)):
        raise InvalidParameterError(f"Profile table {path} must have finite log p values on [0, T0]")

    def log_table(t: FloatArray) -> FloatArray:
        return np.asarray(np.interp(t, t_col, log_col))

    return CoefficientProfile(log_p=log_table, T0=float(t_col[-1]), label=f"profile:{path.name}")


def validate_profile(profile: CoefficientProfile, grid_points: int | None = None) -> None:
    """Check support and continuity of a profile on a uniform grid and its 2x refinement."""
    if grid_points is None:
        grid_points = get_settings().profiles.continuity_grid

    coarse = np.linspace(0.0, profile.T0, grid_points)
    values = profile(coarse)
    if not np.all(np.isfinite(values[:-1])):
        raise InvalidParameterError(f"Profile {profile.label} is not finite on [0, T0)")
    beyond = profile.T0 * np.array([1.0 + 1e-9, 1.5, 2.0, 10.0])
    if np.any(profile(beyond) != LOG_ZERO):
        raise InvalidParameterError(f"Profile {profile.label} must vanish beyond T0")
    if not np.isfinite(values[-1]):
        # left continuity at T0 fails when the endpoint value is -inf
        raise InvalidParameterError(f"Profile {profile.label} is not continuous at T0")

    fine = np.linspace(0.0, profile.T0, 2 * grid_points - 1)
    coarse_jump = float(np.max(np.abs(np.diff(values))))
    fine_jump = float(np.max(np.abs(np.diff(profile(fine)))))
    if coarse_jump > 0 and fine_jump >= coarse_jump:
        raise InvalidParameterError(
            f"Profile {profile.label} looks discontinuous: max jump {fine_jump:.3g} does not shrink under refinement"
        )


def make_profile(
    kind: ProfileKind | str,
    a: float | None = None,
    table: str | Path | None = None,
) -> CoefficientProfile:
    """
    Build one of the named coefficient profiles.

    Args:
        kind: kac, elliptic, kac-case2, kac-case3-rescaled, elliptic-rescaled or custom
        a: limit ratio N_n/n, only for kac-case2
        table: path of a (t, log p) table, only for custom

    Returns:
        The profile, with T0 = 1 except kac-case2 (T0 = 1 - a)
    """
    try:
        kind = ProfileKind(kind)
    except ValueError as e:
        raise InvalidParameterError(f"Unknown profile kind: {kind}") from e

    match kind:
        case ProfileKind.KAC:
            return CoefficientProfile(log_p=_log_kac, T0=1.0, label="kac")
        case ProfileKind.ELLIPTIC:
            return CoefficientProfile(log_p=_log_elliptic, T0=1.0, label="elliptic")
        case ProfileKind.KAC_CASE2:
            return derived_profile_u_a(make_profile(ProfileKind.KAC), _check_ratio(a))
        case ProfileKind.KAC_CASE3_RESCALED:
            return CoefficientProfile(log_p=_log_kac_case3, T0=1.0, label="kac-case3-rescaled")
        case ProfileKind.ELLIPTIC_RESCALED:
            return CoefficientProfile(log_p=_log_elliptic_rescaled, T0=1.0, label="elliptic-rescaled")
        case ProfileKind.CUSTOM:
            if table is None:
                raise InvalidParameterError("custom profile needs a table path")
            profile = load_profile_table(table)
            validate_profile(profile)
            return profile


def counterexample_degree(n: int) -> int:
    """D_n = floor(log n) used by the counterexample ensemble."""
    return math.floor(math.log(n)) if n >= 1 else 0


def log_binomial(n: int, k: np.ndarray) -> FloatArray:
    return np.asarray(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def make_log_coeffs(
    kind: EnsembleKind | str,
    n: int,
    aux: Sequence[int] = (),
    profile: CoefficientProfile | None = None,
) -> LogCoefficients:
    """
    Deterministic coefficient log-magnitudes log p_{k,n}, k = 0..n.

    Args:
        kind: kac, elliptic, counterexample or profile-driven
        n: degree, at least 1
        aux: for counterexample, optionally (D_n,); defaults to floor(log n)
        profile: required for profile-driven (log p_{k,n} = n log p(k/n))
    """
    try:
        kind = EnsembleKind(kind)
    except ValueError as e:
        raise InvalidParameterError(f"Unknown ensemble kind: {kind}") from e
    if n < 1:
        raise InvalidParameterError(f"Degree must be at least 1, got {n}")

    k = np.arange(n + 1, dtype=np.float64)
    match kind:
        case EnsembleKind.KAC:
            log_mag = np.zeros(n + 1)
            label = "kac"
        case EnsembleKind.ELLIPTIC:
            log_mag = 0.5 * log_binomial(n, k)
            label = "elliptic"
        case EnsembleKind.COUNTEREXAMPLE:
            d_n = int(aux[0]) if aux else counterexample_degree(n)
            if d_n < 1 or d_n > n:
                raise InvalidParameterError(f"Counterexample needs 1 <= D_n <= n, got D_n={d_n} for n={n}")
            n_n = n - d_n
            log_mag = np.zeros(n + 1)
            top = k[n_n:]
            log_mag[n_n:] = gammaln(n + 1) + gammaln(top - n_n + 1) - gammaln(top + 1) - gammaln(d_n + 1)
            label = f"counterexample(D_n={d_n})"
        case EnsembleKind.PROFILE_DRIVEN:
            if profile is None:
                raise InvalidParameterError("profile-driven ensemble needs a profile")
            log_mag = n * profile(k / n)
            if not np.isfinite(log_mag[-1]):
                raise InvalidParameterError(f"Profile {profile.label} vanishes at t = 1, degree would not be genuine")
            label = profile.label

    return LogCoefficients(n=n, log_mag=log_mag, ensemble_label=label)


def _rng(master_seed: int, trial: int) -> np.random.Generator:
    # Philox is counter based, the spawn key separates trials
    sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial,))
    return np.random.Generator(np.random.Philox(sequence))


def sample_xi(sampler: SamplerSpec, size: int, master_seed: int, trial: int) -> np.ndarray:
    """
    Draw `size` i.i.d. values. Entry k is the k-th element of the stream keyed by
    (master_seed, trial), so it does not depend on `size` or on other trials.
    """
    rng = _rng(master_seed, trial)
    match sampler.kind:
        case SamplerKind.COMPLEX_GAUSSIAN:
            pairs = rng.standard_normal((size, 2)) / math.sqrt(2.0)
            return pairs[:, 0] + 1j * pairs[:, 1]
        case SamplerKind.REAL_GAUSSIAN:
            return rng.standard_normal(size).astype(np.complex128)
        case SamplerKind.UNIFORM_UNIT_DISK:
            u = rng.random((size, 2))
            radius = np.sqrt(1.0 - u[:, 0])  # 1 - U lies in (0, 1]
            return radius * np.exp(2j * np.pi * u[:, 1])
        case SamplerKind.RADEMACHER:
            return (2.0 * rng.integers(0, 2, size) - 1.0).astype(np.complex128)
        case SamplerKind.HEAVY_TAIL_LOG:
            alpha = sampler.parameters[0] if sampler.parameters else 1.0
            u = rng.random((size, 2))
            log_abs = np.minimum((1.0 - u[:, 0]) ** (-1.0 / alpha), HEAVY_TAIL_CAP)
            return np.exp(log_abs + 2j * np.pi * u[:, 1])
    raise InvalidParameterError(f"Unknown sampler: {sampler.kind}")


def sample_polynomial(
    coeffs: LogCoefficients,
    sampler: SamplerSpec,
    master_seed: int,
    trial: int,
) -> SampledPolynomial:
    xi = sample_xi(sampler, coeffs.n + 1, master_seed, trial)
    return SampledPolynomial(log_mag=coeffs.log_mag, xi=xi, seed_record=(master_seed, trial))


def _abs_log_gap(left: FloatArray, right: FloatArray) -> FloatArray:
    both_zero = (left == LOG_ZERO) & (right == LOG_ZERO)
    with np.errstate(invalid="ignore"):
        gap = np.abs(left - right)
    return np.where(both_zero, 0.0, gap)


def check_profile_fit(
    coeffs_sequence: Sequence[LogCoefficients],
    profile: CoefficientProfile,
    L_n: Sequence[int],
    delta_n: Sequence[float],
) -> FloatArray:
    """
    sup_{0 <= k <= (T0 - delta_n) L_n} |log p_{k,n} / L_n - log p((k / L_n) ^ T0)| for each n.

    Returns:
        One nonnegative deviation per entry of `coeffs_sequence`
    """
    if not len(coeffs_sequence) == len(L_n) == len(delta_n):
        raise InvalidParameterError("coeffs_sequence, L_n and delta_n must have the same length")

    sups = np.empty(len(coeffs_sequence))
    for i, (coeffs, scale, delta) in enumerate(zip(coeffs_sequence, L_n, delta_n, strict=True)):
        if scale < 1:
            raise InvalidParameterError(f"L_n must be positive, got {scale}")
        top_exact = (profile.T0 - delta) * scale
        top = round(top_exact)
        if abs(top - top_exact) > 1e-9:
            raise InvalidParameterError(f"(T0 - delta_n) * L_n = {top_exact} is not an integer")
        if top < 0 or top > coeffs.n:
            raise InvalidParameterError(f"Index range 0..{top} is empty or exceeds degree {coeffs.n}")
        k = np.arange(top + 1, dtype=np.float64)
        observed = coeffs.log_mag[: top + 1] / scale
        expected = profile(np.minimum(k / scale, profile.T0))
        sups[i] = float(np.max(_abs_log_gap(observed, expected)))
    return sups


def ensemble_diagnostics(coeffs: LogCoefficients, N_n: int, profile: CoefficientProfile) -> EnsembleDiagnostics:
    """eta_n and log b_n over the top block N_n <= k <= n."""
    n = coeffs.n
    if not 0 <= N_n <= n:
        raise InvalidParameterError(f"Need 0 <= N_n <= n, got N_n={N_n}, n={n}")
    k = np.arange(N_n, n + 1, dtype=np.float64)
    block = coeffs.log_mag[N_n:]
    eta = float(np.max(_abs_log_gap(block / n, profile(k / n))))
    log_b = float(np.max(block))
    return EnsembleDiagnostics(eta=eta, log_b=log_b)


def default_profile(kind: EnsembleKind | str) -> CoefficientProfile:
    """Profile an ensemble is fitted against: kac and counterexample use p = 1 on [0, 1]."""
    kind = EnsembleKind(kind)
    if kind == EnsembleKind.ELLIPTIC:
        return make_profile(ProfileKind.ELLIPTIC)
    if kind == EnsembleKind.PROFILE_DRIVEN:
        raise InvalidParameterError("profile-driven ensembles carry their own profile")
    return make_profile(ProfileKind.KAC)


def parse_ensemble(label: str) -> tuple[EnsembleKind, CoefficientProfile | None]:
    """Resolve a CLI label: kac | elliptic | counterexample | profile:<file>."""
    if label.startswith("profile:"):
        path = label.removeprefix("profile:")
        if not path:
            raise InvalidParameterError("profile: label needs a file path")
        return EnsembleKind.PROFILE_DRIVEN, make_profile(ProfileKind.CUSTOM, table=path)
    try:
        kind = EnsembleKind(label)
    except ValueError as e:
        raise InvalidParameterError(f"Unknown ensemble label: {label}") from e
    if kind == EnsembleKind.PROFILE_DRIVEN:
        raise InvalidParameterError("Use profile:<file> for profile-driven ensembles")
    return kind, None
