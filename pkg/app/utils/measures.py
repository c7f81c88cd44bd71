import math
from collections.abc import Callable, Sequence

import numpy as np
import numpy.typing as npt

from app.core.config import get_settings
from app.core.exceptions import InvalidParameterError
from app.models import EmpiricalMeasure, FloatArray, RadialCDF, RadialCDFKind, RootSet

TWO_PI = 2.0 * math.pi


def polar_coordinates(roots: npt.ArrayLike) -> tuple[FloatArray, FloatArray]:
    """Moduli and angles in [0, 2pi), in input order."""
    z = np.asarray(roots, dtype=np.complex128)
    angles = np.mod(np.angle(z), TWO_PI)
    return np.abs(z), np.where(angles >= TWO_PI, 0.0, angles)


def measure_from_roots(roots: npt.ArrayLike) -> EmpiricalMeasure:
    moduli, angles = polar_coordinates(roots)
    order = np.argsort(moduli, kind="stable")
    return EmpiricalMeasure(moduli=moduli[order], angles=angles[order])


def empirical_measure(rs: RootSet) -> EmpiricalMeasure:
    if rs.degree == 0:
        raise InvalidParameterError("Empirical measure of an empty root set")
    return measure_from_roots(rs.roots)


def pool_measures(measures: Sequence[EmpiricalMeasure]) -> EmpiricalMeasure:
    """Union of several root multisets, re-sorted by modulus."""
    if not measures:
        raise InvalidParameterError("Nothing to pool")
    moduli = np.concatenate([m.moduli for m in measures])
    angles = np.concatenate([m.angles for m in measures])
    order = np.argsort(moduli, kind="stable")
    return EmpiricalMeasure(moduli=moduli[order], angles=angles[order])


def scale_measure(m: EmpiricalMeasure, h: float) -> EmpiricalMeasure:
    """S_h: every modulus multiplied by h, angles kept."""
    if not h > 0:
        raise InvalidParameterError(f"Scale factor must be positive, got {h}")
    return EmpiricalMeasure(moduli=m.moduli * h, angles=m.angles)


def radial_cdf(m: EmpiricalMeasure) -> RadialCDF:
    """Right-continuous F(r) = #{|z| <= r} / count."""
    if m.count < 1:
        raise InvalidParameterError("Radial CDF of an empty measure")
    moduli = m.moduli

    def evaluate(r: FloatArray) -> FloatArray:
        return np.searchsorted(moduli, r, side="right") / moduli.shape[0]

    return RadialCDF(evaluate, RadialCDFKind.EMPIRICAL_STEP, jumps=np.unique(moduli), label="empirical")


def theoretical_cdf(fn: Callable[[FloatArray], FloatArray], label: str = "") -> RadialCDF:
    return RadialCDF(fn, RadialCDFKind.THEORETICAL, label=label)


def _ks_grid() -> FloatArray:
    measures = get_settings().measures
    return np.geomspace(measures.ks_grid_lo, measures.ks_grid_hi, measures.ks_grid_points)


def ks_distance(f: RadialCDF, g: RadialCDF) -> float:
    """
    sup_r |F(r) - G(r)| over the jumps of both arguments (and their left limits),
    plus the configured log-spaced grid when either curve is theoretical.
    """
    points = [np.zeros(1), f.jumps, g.jumps]
    if RadialCDFKind.THEORETICAL in (f.kind, g.kind):
        points.append(_ks_grid())
    r = np.unique(np.concatenate(points))
    gap = np.abs(f(r) - g(r))
    positive = r[r > 0]
    left_gap = np.abs(f.left_limit(positive) - g.left_limit(positive)) if positive.shape[0] else np.zeros(1)
    return float(min(1.0, max(np.max(gap), np.max(left_gap))))


def angular_discrepancy(m: EmpiricalMeasure) -> float:
    """Kuiper statistic V = D+ + D- of angles / 2pi against the uniform law on [0, 1)."""
    if m.count < 2:
        raise InvalidParameterError("Angular discrepancy needs at least two points")
    u = np.sort(m.angles / TWO_PI)
    n = u.shape[0]
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - u)
    d_minus = np.max(u - (i - 1) / n)
    return float(d_plus + d_minus)


def kuiper_pvalue(v: float, count: int) -> float:
    """Asymptotic probability of a Kuiper statistic at least `v` under uniformity."""
    if count < 1:
        raise InvalidParameterError("count must be positive")
    en = math.sqrt(count)
    lam = (en + 0.155 + 0.24 / en) * v
    if lam < 0.4:
        return 1.0
    j = np.arange(1, 101, dtype=np.float64)
    a = 2.0 * (j * lam) ** 2
    terms = 2.0 * (2.0 * a - 1.0) * np.exp(-a)
    return float(np.clip(np.sum(terms), 0.0, 1.0))


def annulus_fraction(m: EmpiricalMeasure, lo: float, hi: float) -> float:
    """Fraction of points with lo <= |z| <= hi."""
    if not 0 <= lo <= hi:
        raise InvalidParameterError(f"Invalid annulus [{lo}, {hi}]")
    if m.count == 0:
        return 0.0
    inside = np.searchsorted(m.moduli, hi, side="right") - np.searchsorted(m.moduli, lo, side="left")
    return float(inside / m.count)
