import time
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Any, NamedTuple

import numpy as np
import pandas as pd

from app.cli.logger import get_logger
from app.core.config import get_settings
from app.core.exceptions import InvalidParameterError, RootFindingError
from app.models import (
    ComplexArray,
    DerivativePlan,
    EmpiricalMeasure,
    FloatArray,
    LogCoefficients,
    RadialCDF,
    SampledPolynomial,
    SamplerSpec,
)
from app.schemas.requests import ExperimentConfig, GridSpec, RescaleMode, TargetKind, TargetSpec
from app.schemas.responses import Report, TrialResult
from app.utils.calculus import PlanRule, RescaleKind, differentiate, recommended_rescale, rescale
from app.utils.ensembles import EnsembleKind, ProfileKind, make_log_coeffs, make_profile, parse_ensemble, sample_xi
from app.utils.limits import (
    FixedDegreeKind,
    closed_form_cdf,
    derived_profile_u_a,
    fixed_degree_limit_poly,
    legendre_fenchel,
    limit_cdf,
)
from app.utils.measures import (
    angular_discrepancy,
    annulus_fraction,
    ks_distance,
    kuiper_pvalue,
    measure_from_roots,
    pool_measures,
    radial_cdf,
    theoretical_cdf,
)
from app.utils.rootfind import find_roots, match_roots

logger = get_logger(__name__)


class TrialOutcome(NamedTuple):
    trial: int
    roots: ComplexArray
    residuals: FloatArray
    iterations: int
    error: str | None = None


def resolve_target(target: TargetSpec | str) -> RadialCDF:
    """Theoretical radial CDF for a closed-form case or a transform of a named profile."""
    spec = TargetSpec.parse(target) if isinstance(target, str) else target
    if spec.kind == TargetKind.CLOSED_FORM:
        assert spec.case is not None
        case, a = spec.case, spec.a
        return theoretical_cdf(lambda r: closed_form_cdf(case, r, a), label=spec.label)

    assert spec.profile is not None
    try:
        profile = make_profile(ProfileKind(spec.profile))
    except ValueError:
        # anything that is not a named profile is read as a (t, log p) table
        profile = make_profile(ProfileKind.CUSTOM, table=spec.profile)
    if spec.a is not None:
        profile = derived_profile_u_a(profile, spec.a)
    logger.info(f"Computing Legendre-Fenchel transform of {profile.label}")
    return limit_cdf(legendre_fenchel(profile))


def tabulate_limit(target: TargetSpec | str, grid: GridSpec) -> pd.DataFrame:
    r = grid.values()
    cdf = resolve_target(target)
    return pd.DataFrame({"r": r, "cdf": cdf(r)})


def _rescale_kind(ensemble: EnsembleKind) -> RescaleKind:
    match ensemble:
        case EnsembleKind.KAC | EnsembleKind.COUNTEREXAMPLE:
            return RescaleKind.KAC
        case EnsembleKind.ELLIPTIC:
            return RescaleKind.ELLIPTIC
    raise InvalidParameterError(f"No automatic rescaling for {ensemble} ensembles")


def derivative_coefficients(cfg: ExperimentConfig) -> tuple[LogCoefficients, DerivativePlan, float]:
    """Normalized (and optionally rescaled) coefficients of the N_n-th derivative."""
    kind, profile = parse_ensemble(cfg.ensemble)
    coeffs = make_log_coeffs(kind, cfg.n, profile=profile)
    plan = cfg.plan
    derivative = differentiate(coeffs, plan)
    log_h = 0.0
    if cfg.rescale == RescaleMode.AUTO:
        log_h = recommended_rescale(_rescale_kind(kind), plan, fixed_degree=cfg.nn_rule.rule == PlanRule.FIXED)
        derivative = rescale(derivative, log_h)
    return derivative, plan, log_h


def solve_trial(coeffs: LogCoefficients, sampler: SamplerSpec, seed: int, trial: int) -> TrialOutcome:
    """Sample one polynomial and find its roots; non-convergence is reported, not raised."""
    xi = sample_xi(sampler, coeffs.n + 1, seed, trial)
    poly = SampledPolynomial(log_mag=coeffs.log_mag, xi=xi, seed_record=(seed, trial))
    try:
        root_set = find_roots(poly)
    except RootFindingError as e:
        return TrialOutcome(trial, np.empty(0, dtype=np.complex128), np.empty(0), 0, e.detail)
    return TrialOutcome(trial, root_set.roots, root_set.residuals, root_set.iterations)


def _solve_all(coeffs: LogCoefficients, cfg: ExperimentConfig) -> list[TrialOutcome]:
    workers = get_settings().experiments.workers
    solve = partial(solve_trial, coeffs, cfg.sampler, cfg.seed)
    if workers > 1 and cfg.trials > 1:
        logger.debug(f"Dispatching {cfg.trials} trials to {workers} worker processes")
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map keeps trial order, so the merge is deterministic
            return list(pool.map(solve, range(cfg.trials)))
    return [solve(trial) for trial in range(cfg.trials)]


def _annulus_key(lo: float, hi: float) -> str:
    return f"{lo:g}-{hi:g}"


def pooled_statistics(
    measures: Sequence[EmpiricalMeasure], target: RadialCDF | None, annuli: Sequence[tuple[float, float]]
) -> dict[str, Any]:
    """Report fields computed on the union of the trials' roots; the order of `measures` does not matter."""
    pooled = pool_measures(measures)
    v = angular_discrepancy(pooled) if pooled.count >= 2 else None
    return {
        "pooled_ks": ks_distance(radial_cdf(pooled), target) if target is not None else None,
        "angular_discrepancy": v,
        "kuiper_pvalue": kuiper_pvalue(v, pooled.count) if v is not None else None,
        # every trial has D_n roots, so the pooled fraction is the mean of the trial fractions
        "annulus_fractions": {_annulus_key(lo, hi): annulus_fraction(pooled, lo, hi) for lo, hi in annuli},
        "pooled_root_count": pooled.count,
    }


def run_trials(cfg: ExperimentConfig) -> Report:
    """
    Run cfg.trials independent draws: sample, differentiate, optionally rescale,
    find roots and compute statistics against the target.

    Failed trials are kept in the report with their error and left out of
    every pooled statistic.
    """
    started = time.perf_counter()
    coeffs, plan, log_h = derivative_coefficients(cfg)
    target = resolve_target(cfg.target) if cfg.target is not None else None
    logger.info(
        f"Running {cfg.trials} trials of {cfg.ensemble} n={cfg.n} N_n={plan.N_n} D_n={plan.D_n} "
        f"rescale={cfg.rescale.value} seed={cfg.seed}"
    )

    results: list[TrialResult] = []
    measures: list[EmpiricalMeasure] = []
    for outcome in _solve_all(coeffs, cfg):
        if outcome.error is not None:
            logger.warning(f"Trial {outcome.trial} failed: {outcome.error}")
            results.append(TrialResult(trial=outcome.trial, degree=plan.D_n, failed=True, error=outcome.error))
            continue
        rs_measure = measure_from_roots(outcome.roots)
        measures.append(rs_measure)
        results.append(
            TrialResult(
                trial=outcome.trial,
                degree=plan.D_n,
                roots=outcome.roots,
                ks=ks_distance(radial_cdf(rs_measure), target) if target is not None else None,
                angular_discrepancy=angular_discrepancy(rs_measure) if rs_measure.count >= 2 else None,
                annulus_fractions=[annulus_fraction(rs_measure, lo, hi) for lo, hi in cfg.annuli],
                residual_max=float(np.max(outcome.residuals)),
                residual_median=float(np.median(outcome.residuals)),
                iterations=outcome.iterations,
            )
        )
        logger.debug(f"Trial {outcome.trial}: {outcome.roots.shape[0]} roots in {outcome.iterations} sweeps")

    failed = [t.trial for t in results if t.failed]
    report = Report(
        config=cfg,
        plan_N_n=plan.N_n,
        plan_D_n=plan.D_n,
        log_rescale=log_h,
        trials=results,
        per_trial_ks=[t.ks for t in results if not t.failed],
        failed_trials=failed,
    )
    if measures:
        report = report.model_copy(update=pooled_statistics(measures, target, cfg.annuli))
    runtime = time.perf_counter() - started
    logger.info(f"Finished {cfg.trials} trials in {runtime:.2f}s, {len(failed)} failed")
    return report.model_copy(update={"runtime_seconds": runtime})


def fixed_degree_convergence(
    kind: FixedDegreeKind | str,
    m: int,
    n_list: Sequence[int],
    seed: int,
    sampler: SamplerSpec | None = None,
    xi: ComplexArray | None = None,
) -> list[float]:
    """
    Max pairing distance between the rescaled zeros of the (n - m)-th derivative
    of a degree-n polynomial and the zeros of its fixed-degree limit, per n.

    One xi draw of length m + 1 (trial 0 of `seed`, or the given `xi`) fills
    the top m + 1 slots for every n.
    """
    kind = FixedDegreeKind(kind)
    if xi is None:
        xi = sample_xi(sampler or SamplerSpec(), m + 1, seed, 0)
    limit_roots = limit_roots_of(kind, m, xi)

    distances = []
    for n in n_list:
        if n <= m:
            raise InvalidParameterError(f"Need n > m, got n={n}, m={m}")
        plan = DerivativePlan(n=n, N_n=n - m)
        coeffs = differentiate(make_log_coeffs(EnsembleKind(kind.value), n), plan)
        coeffs = rescale(coeffs, recommended_rescale(RescaleKind(kind.value), plan, fixed_degree=True))
        roots = find_roots(SampledPolynomial(log_mag=coeffs.log_mag, xi=xi, seed_record=(seed, 0))).roots
        distances.append(match_roots(roots, limit_roots))
        logger.debug(f"fixed-degree {kind} m={m} n={n}: max pairing distance {distances[-1]:.3e}")
    return distances


def limit_roots_of(kind: FixedDegreeKind | str, m: int, xi: ComplexArray) -> ComplexArray:
    return find_roots(fixed_degree_limit_poly(kind, m, xi)).roots

