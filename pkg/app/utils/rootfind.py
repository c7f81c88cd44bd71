"""
Simultaneous root finding for polynomials given in log-magnitude form.

The main solver is Aberth-Ehrlich with Jacobi sweeps: every sweep reads the
previous sweep's root vector, so results do not depend on the block size used
for the pairwise sums. Initial guesses come from the Newton polygon of
(k, log|c_k|). The companion-matrix eigenvalue solver is kept as an oracle for
small degrees.

Coefficients are never exponentiated on one common scale. A point z is
evaluated through the tilted polynomial q(w) = sum_k T_k w^k, w = z / rho,
T_k = c_k rho^k / max_j |c_j rho^j|, with log(rho) taken from a grid around
log|z|. The terms that dominate near z are then of order one whatever the
spread of log|c_k|.
"""

import math

import numpy as np
import numpy.typing as npt
from scipy.optimize import linear_sum_assignment

from app.cli.logger import get_logger
from app.core.config import get_settings
from app.core.exceptions import InvalidParameterError, RootFindingError
from app.models import ComplexArray, FloatArray, RootSet, SampledPolynomial

logger = get_logger(__name__)

# Dekker splitting constant 2^27 + 1
_SPLITTER = 134217729.0
# degree times tilt grid spacing; |w|^k stays within exp(+-_TILT_SPAN / 2)
_TILT_SPAN = 400.0
_MAX_TILT_STEP = 0.5

IndexArray = npt.NDArray[np.intp]


def _two_sum(a: FloatArray, b: FloatArray) -> tuple[FloatArray, FloatArray]:
    s = a + b
    bp = s - a
    return s, (a - (s - bp)) + (b - bp)


def _split(a: FloatArray) -> tuple[FloatArray, FloatArray]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a: FloatArray, b: FloatArray) -> tuple[FloatArray, FloatArray]:
    p = a * b
    a_hi, a_lo = _split(a)
    b_hi, b_lo = _split(b)
    return p, a_lo * b_lo - (((p - a_hi * b_hi) - a_lo * b_hi) - a_hi * b_lo)


def _compensated_horner(table: ComplexArray, rows: IndexArray, x: ComplexArray) -> ComplexArray:
    """
    Horner's scheme with error-free transformations on real and imaginary parts.

    `table[k, u]` is the k-th coefficient (highest degree first) of tilt u and
    point i is evaluated with tilt `rows[i]`.
    """
    x_re, x_im = x.real.copy(), x.imag.copy()
    first = table[0][rows]
    s_re, s_im = first.real.copy(), first.imag.copy()
    err = np.zeros(x.shape, dtype=np.complex128)
    for coeff_row in table[1:]:
        c = coeff_row[rows]
        p1, e1 = _two_prod(s_re, x_re)
        p2, e2 = _two_prod(s_im, -x_im)
        p3, e3 = _two_prod(s_re, x_im)
        p4, e4 = _two_prod(s_im, x_re)
        t_re, e5 = _two_sum(p1, p2)
        t_im, e6 = _two_sum(p3, p4)
        s_re, e7 = _two_sum(t_re, c.real)
        s_im, e8 = _two_sum(t_im, c.imag)
        err = err * x + ((e1 + e2 + e5 + e7) + 1j * (e3 + e4 + e6 + e8))
    return (s_re + 1j * s_im) + err


def _horner_with_derivative(table: ComplexArray, rows: IndexArray, x: ComplexArray) -> tuple[ComplexArray, ComplexArray]:
    value = table[0][rows].astype(np.complex128)
    derivative = np.zeros(x.shape, dtype=np.complex128)
    for coeff_row in table[1:]:
        derivative = derivative * x + value
        value = value * x + coeff_row[rows]
    return value, derivative


def _horner_abs(abs_table: FloatArray, rows: IndexArray, x_abs: FloatArray) -> FloatArray:
    total = abs_table[0][rows].astype(np.float64)
    for coeff_row in abs_table[1:]:
        total = total * x_abs + coeff_row[rows]
    return total


class _Polynomial:
    """Log-magnitudes and phases of c_0..c_D (c_0 != 0), evaluated through cached tilts."""

    def __init__(self, log_abs: FloatArray, phase: ComplexArray) -> None:
        self.degree = log_abs.shape[0] - 1
        self.log_abs = log_abs
        self.phase = phase
        self.powers = np.arange(self.degree + 1, dtype=np.float64)
        self.step = min(_MAX_TILT_STEP, _TILT_SPAN / max(self.degree, 1))
        self._tilts: dict[int, ComplexArray] = {}

    def _tilt_row(self, index: int) -> ComplexArray:
        row = self._tilts.get(index)
        if row is None:
            exponent = self.log_abs + self.powers * (index * self.step)
            with np.errstate(under="ignore"):
                row = np.exp(exponent - np.max(exponent)) * self.phase
            self._tilts[index] = row
        return row

    def _tilted(self, z: ComplexArray) -> tuple[ComplexArray, IndexArray, ComplexArray, FloatArray]:
        """Coefficient table (highest degree first), tilt per point, w = z / rho, rho."""
        with np.errstate(divide="ignore", invalid="ignore"):
            log_r = np.log(np.abs(z))
        index = np.where(np.isfinite(log_r), np.rint(log_r / self.step), 0.0).astype(np.int64)
        tilts, rows = np.unique(index, return_inverse=True)
        table = np.stack([self._tilt_row(int(t)) for t in tilts], axis=1)[::-1]
        rho = np.exp(tilts * self.step)[rows]
        return table, rows.reshape(z.shape), z / rho, rho

    def newton_step(self, z: ComplexArray) -> tuple[ComplexArray, FloatArray]:
        """p(z)/p'(z) and a plain-Horner normalized residual at every z."""
        table, rows, w, rho = self._tilted(z)
        abs_table = np.abs(table)
        step = np.empty(z.shape, dtype=np.complex128)
        residual = np.empty(z.shape)
        # q(w) = p(rho w) / scale, so p/p' = rho q/q'
        inner = np.abs(w) <= 1.0
        if np.any(inner):
            wi, ri = w[inner], rows[inner]
            value, derivative = _horner_with_derivative(table, ri, wi)
            step[inner] = rho[inner] * value / derivative
            residual[inner] = np.abs(value) / _horner_abs(abs_table, ri, np.abs(wi))
        outer = ~inner
        if np.any(outer):
            wo, ro = w[outer], rows[outer]
            v = 1.0 / wo
            # q(w) = w^D r(v) with r the reversed polynomial, so q/q' = w r / (D r - v r')
            value, derivative = _horner_with_derivative(table[::-1], ro, v)
            step[outer] = rho[outer] * wo * value / (self.degree * value - v * derivative)
            residual[outer] = np.abs(value) / _horner_abs(abs_table[::-1], ro, np.abs(v))
        return step, residual

    def residual(self, z: ComplexArray) -> FloatArray:
        """|p(z)| / sum |c_k| |z|^k with compensated evaluation."""
        table, rows, w, _ = self._tilted(z)
        abs_table = np.abs(table)
        out = np.empty(z.shape)
        inner = np.abs(w) <= 1.0
        if np.any(inner):
            wi, ri = w[inner], rows[inner]
            out[inner] = np.abs(_compensated_horner(table, ri, wi)) / _horner_abs(abs_table, ri, np.abs(wi))
        outer = ~inner
        if np.any(outer):
            v, ro = 1.0 / w[outer], rows[outer]
            out[outer] = np.abs(_compensated_horner(table[::-1], ro, v)) / _horner_abs(abs_table[::-1], ro, np.abs(v))
        return out


def _trim(poly: SampledPolynomial) -> tuple[FloatArray, ComplexArray, int]:
    """log|c_k| and phases with the low-order zero block stripped, and its length."""
    log_abs = poly.log_abs()
    if not np.isfinite(log_abs[-1]):
        raise InvalidParameterError("Leading coefficient must be nonzero")
    zero_roots = int(np.argmax(np.isfinite(log_abs)))
    return log_abs[zero_roots:], poly.phase()[zero_roots:], zero_roots


def newton_polygon_radii(log_abs: npt.ArrayLike) -> tuple[FloatArray, npt.NDArray[np.int64]]:
    """
    Radii and multiplicities from the upper convex hull of (k, log|c_k|).

    A hull edge from vertex i to vertex j predicts j - i roots of modulus
    exp((log|c_i| - log|c_j|) / (j - i)). LOG_ZERO entries are skipped.
    """
    values = np.asarray(log_abs, dtype=np.float64)
    points = [(k, float(v)) for k, v in enumerate(values) if np.isfinite(v)]
    if len(points) < 2:
        return np.empty(0), np.empty(0, dtype=np.int64)

    hull: list[tuple[int, float]] = []
    for point in points:
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            cross = (x1 - x0) * (point[1] - y0) - (y1 - y0) * (point[0] - x0)
            if cross < 0:
                break
            hull.pop()
        hull.append(point)

    radii = np.empty(len(hull) - 1)
    multiplicities = np.empty(len(hull) - 1, dtype=np.int64)
    for i, ((k0, y0), (k1, y1)) in enumerate(zip(hull[:-1], hull[1:], strict=True)):
        multiplicities[i] = k1 - k0
        radii[i] = math.exp((y0 - y1) / (k1 - k0))
    return radii, multiplicities


def _initial_guesses(log_abs: FloatArray) -> ComplexArray:
    radii, multiplicities = newton_polygon_radii(log_abs)
    degree = log_abs.shape[0] - 1
    guesses = []
    offset = 0
    for radius, count in zip(radii, multiplicities, strict=True):
        angles = 2.0 * np.pi * (np.arange(count) / count + offset / degree) + 0.4
        guesses.append(radius * np.exp(1j * angles))
        offset += int(count)
    return np.concatenate(guesses)


def _aberth_corrections(z: ComplexArray, active: IndexArray, step: ComplexArray, chunk_size: int) -> ComplexArray:
    corrections = np.empty(active.shape[0], dtype=np.complex128)
    for start in range(0, active.shape[0], chunk_size):
        rows = active[start : start + chunk_size]
        diff = z[rows, None] - z[None, :]
        diff[np.arange(rows.shape[0]), rows] = np.inf
        repulsion = np.sum(1.0 / diff, axis=1)
        ratio = step[start : start + chunk_size]
        corrections[start : start + rows.shape[0]] = ratio / (1.0 - ratio * repulsion)
    return corrections


def _aberth(
    poly: _Polynomial, z: ComplexArray, tol: float, max_iterations: int, chunk_size: int
) -> tuple[ComplexArray, int]:
    z = z.copy()
    active = np.arange(z.shape[0])
    iterations = 0
    while active.shape[0] and iterations < max_iterations:
        iterations += 1
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            step, residual = poly.newton_step(z[active])
            corrections = _aberth_corrections(z, active, step, chunk_size)
        finite = np.isfinite(corrections)
        z_new = z.copy()
        z_new[active[finite]] -= corrections[finite]
        # relative to |z|: roots of any size are nonzero once the zero block is stripped
        settled = (np.abs(corrections) <= tol * np.abs(z[active])) | (residual <= tol)
        z = z_new
        active = active[~(settled & finite)]
    return z, iterations


def find_roots(poly: SampledPolynomial, tol: float | None = None) -> RootSet:
    """
    All complex zeros of `poly` by Aberth-Ehrlich iteration.

    Low-order zero coefficients are returned as exact zero roots. A root is
    accepted when its compensated normalized residual is at most the configured
    residual tolerance; otherwise the solver restarts once from perturbed
    guesses and then raises RootFindingError with per-root flags.

    Args:
        poly: sampled polynomial of degree >= 1
        tol: relative correction tolerance; defaults to settings.rootfind.tol

    Returns:
        RootSet with exactly `poly.degree` roots
    """
    settings = get_settings().rootfind
    if tol is None:
        tol = settings.tol
    if poly.degree < 1:
        raise InvalidParameterError("Polynomial of degree 0 has no roots")

    log_abs, phase, zero_roots = _trim(poly)
    zeros = np.zeros(zero_roots, dtype=np.complex128)
    if log_abs.shape[0] == 1:
        return RootSet(roots=zeros, degree=poly.degree, residuals=np.zeros(zero_roots), converged=(True,) * zero_roots)

    polynomial = _Polynomial(log_abs, phase)
    guesses = _initial_guesses(log_abs)
    roots, iterations = _aberth(polynomial, guesses, tol, settings.max_iterations, settings.chunk_size)
    residuals = polynomial.residual(roots)
    converged = residuals <= settings.residual_tol

    if not np.all(converged):
        logger.warning(
            f"Root finder left {int(np.sum(~converged))} of {roots.shape[0]} roots unconverged, restarting"
        )
        rng = np.random.Generator(np.random.Philox(polynomial.degree))
        jitter = settings.restart_jitter * np.exp(2j * np.pi * rng.random(guesses.shape[0]))
        roots, extra = _aberth(polynomial, guesses * (1.0 + jitter), tol, settings.max_iterations, settings.chunk_size)
        iterations += extra
        residuals = polynomial.residual(roots)
        converged = residuals <= settings.residual_tol
        if not np.all(converged):
            flags = [True] * zero_roots + converged.tolist()
            raise RootFindingError(
                f"Aberth iteration did not converge for {int(np.sum(~converged))} of {poly.degree} roots",
                converged=flags,
            )

    return RootSet(
        roots=np.concatenate([zeros, roots]),
        degree=poly.degree,
        residuals=np.concatenate([np.zeros(zero_roots), residuals]),
        converged=(True,) * poly.degree,
        iterations=iterations,
    )


def root_residual(poly: SampledPolynomial, z: complex) -> float:
    """|p(z)| / sum_k |c_k| |z|^k, independent of the overall coefficient scale."""
    log_abs = poly.log_abs()
    if not np.any(np.isfinite(log_abs)):
        return 0.0
    zero_roots = int(np.argmax(np.isfinite(log_abs)))
    if z == 0:
        return 0.0 if zero_roots else 1.0
    # p(z) = z^m q(z) and the factor |z|^m cancels in the ratio
    polynomial = _Polynomial(log_abs[zero_roots:], poly.phase()[zero_roots:])
    return float(polynomial.residual(np.array([z], dtype=np.complex128))[0])


def companion_roots(poly: SampledPolynomial) -> ComplexArray:
    """Eigenvalues of the companion matrix; a reference solver for small degrees."""
    if poly.degree < 1:
        raise InvalidParameterError("Polynomial of degree 0 has no roots")
    log_abs, phase, zero_roots = _trim(poly)
    degree = log_abs.shape[0] - 1
    if degree == 0:
        return np.zeros(zero_roots, dtype=np.complex128)
    # z = rho w with |c_0| rho^0 = |c_D| rho^D balances the two ends
    log_rho = (log_abs[0] - log_abs[-1]) / degree
    exponent = log_abs + np.arange(degree + 1) * log_rho
    with np.errstate(under="ignore"):
        coeffs = np.exp(exponent - np.max(exponent)) * phase
    companion = np.zeros((degree, degree), dtype=np.complex128)
    companion[1:, :-1] = np.eye(degree - 1)
    companion[:, -1] = -coeffs[:-1] / coeffs[-1]
    roots = math.exp(log_rho) * np.linalg.eigvals(companion)
    return np.concatenate([np.zeros(zero_roots, dtype=np.complex128), roots.astype(np.complex128)])


def match_roots(left: npt.ArrayLike, right: npt.ArrayLike) -> float:
    """Max distance of the minimal-cost perfect matching between two root multisets."""
    a = np.asarray(left, dtype=np.complex128)
    b = np.asarray(right, dtype=np.complex128)
    if a.shape != b.shape:
        raise InvalidParameterError(f"Cannot pair {a.shape[0]} roots with {b.shape[0]} roots")
    if a.shape[0] == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))
