import math

import numpy as np
import pytest

from app.core.config import get_settings
from app.core.exceptions import InvalidParameterError
from app.models import CoefficientProfile, RadialCDFKind
from app.utils.ensembles import ProfileKind, kac_case2_f1, make_profile
from app.utils.limits import (
    FixedDegreeKind,
    LimitCase,
    TransformCase,
    closed_form_cdf,
    closed_form_density,
    closed_form_transform,
    default_s_grid,
    derived_profile_u_a,
    fixed_degree_limit_poly,
    legendre_fenchel,
    limit_cdf,
    limit_radial_cdf,
)
from app.utils.rootfind import find_roots, match_roots

GOLDEN_RATIO_CONJUGATE = (math.sqrt(5.0) - 1.0) / 2.0


def test_kac_transform_is_positive_part(kac_profile: CoefficientProfile) -> None:
    tr = legendre_fenchel(kac_profile)

    assert tr.evaluate(-1.0)[0] == pytest.approx(0.0, abs=1e-12)
    assert tr.evaluate(0.7)[0] == pytest.approx(0.7, abs=1e-12)


def test_kac_case3_transform_below_zero() -> None:
    tr = legendre_fenchel(make_profile(ProfileKind.KAC_CASE3_RESCALED))

    assert tr.evaluate(-1.0)[0] == pytest.approx(math.exp(-1.0) - 1.0, abs=1e-6)


def test_elliptic_rescaled_transform_at_zero() -> None:
    tr = legendre_fenchel(make_profile(ProfileKind.ELLIPTIC_RESCALED))
    t0 = GOLDEN_RATIO_CONJUGATE

    expected = (t0 - 1.0) / 2.0 - 0.5 * math.log(1.0 - t0)
    assert tr.evaluate(0.0)[0] == pytest.approx(expected, abs=1e-6)
    assert expected == pytest.approx(0.2902, abs=1e-4)


@pytest.mark.parametrize(
    "profile_kind,case,a",
    [
        (ProfileKind.KAC, TransformCase.KAC, None),
        (ProfileKind.KAC_CASE2, TransformCase.KAC_CASE2, 0.5),
        (ProfileKind.KAC_CASE2, TransformCase.KAC_CASE2, 0.2),
        (ProfileKind.KAC_CASE3_RESCALED, TransformCase.KAC_CASE3_RESCALED, None),
        (ProfileKind.ELLIPTIC_RESCALED, TransformCase.ELLIPTIC_RESCALED, None),
        (ProfileKind.ELLIPTIC, TransformCase.ELLIPTIC, None),
    ],
)
def test_numeric_transform_matches_closed_form(profile_kind: ProfileKind, case: TransformCase, a: float | None) -> None:
    tr = legendre_fenchel(make_profile(profile_kind, a=a))

    gap = np.abs(tr.values - closed_form_transform(case, tr.s_grid, a=a))

    assert tr.s_grid[0] == -8.0 and tr.s_grid[-1] == 8.0
    assert np.max(gap) <= 1e-3
    assert tr.is_convex()


def test_case2_closed_form_is_continuous_at_the_edge() -> None:
    a = 0.3
    edge = math.log(1.0 - a)

    below, above = closed_form_transform(TransformCase.KAC_CASE2, [edge - 1e-9, edge + 1e-9], a=a)

    assert below == pytest.approx(above, abs=1e-8)
    assert above == pytest.approx((1.0 - a) * math.log(1.0 - a), abs=1e-8)


def test_argmax_lies_in_the_support(elliptic_profile: CoefficientProfile) -> None:
    tr = legendre_fenchel(elliptic_profile)

    assert np.all(tr.argmax >= 0.0)
    assert np.all(tr.argmax <= elliptic_profile.T0)
    # refinement may keep a grid point, so allow one t-step of slack
    assert np.all(np.diff(tr.argmax) >= -elliptic_profile.T0 / 1000)


def test_transform_rejects_coarse_t_grid(kac_profile: CoefficientProfile) -> None:
    with pytest.raises(InvalidParameterError):
        legendre_fenchel(kac_profile, t_resolution=999)


def test_transform_rejects_decreasing_s_grid(kac_profile: CoefficientProfile) -> None:
    with pytest.raises(InvalidParameterError):
        legendre_fenchel(kac_profile, s_grid=[1.0, 0.0, -1.0])


def test_default_grid_follows_settings(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("TRANSFORM__S_POINTS", "11")
    monkeypatch.setenv("TRANSFORM__S_MIN", "-1")
    monkeypatch.setenv("TRANSFORM__S_MAX", "1")
    get_settings.cache_clear()

    np.testing.assert_allclose(default_s_grid(), np.linspace(-1.0, 1.0, 11))


def test_kac_limit_cdf_is_the_unit_circle(kac_profile: CoefficientProfile) -> None:
    tr = legendre_fenchel(kac_profile)

    np.testing.assert_allclose(limit_radial_cdf(tr, [0.5, 2.0]), [0.0, 1.0], atol=1e-9)


def test_composed_profile_recovers_kac_a_measure(kac_profile: CoefficientProfile) -> None:
    tr = legendre_fenchel(derived_profile_u_a(kac_profile, 0.5))

    assert limit_radial_cdf(tr, 0.25, mass_norm=0.5)[0] == pytest.approx(1.0 / 3.0, abs=1e-3)


def test_case3_limit_cdf_is_uniform_radius() -> None:
    tr = legendre_fenchel(make_profile(ProfileKind.KAC_CASE3_RESCALED))

    assert limit_radial_cdf(tr, 0.5)[0] == pytest.approx(0.5, abs=1e-3)


def test_elliptic_rescaled_limit_cdf_matches_closed_form() -> None:
    tr = legendre_fenchel(make_profile(ProfileKind.ELLIPTIC_RESCALED))
    r = np.geomspace(0.01, 100.0, 50)

    np.testing.assert_allclose(limit_radial_cdf(tr, r), closed_form_cdf(LimitCase.ELLIPTIC_RESCALED, r), atol=2e-3)


def test_limit_cdf_is_monotone_with_unit_mass(kac_profile: CoefficientProfile) -> None:
    tr = legendre_fenchel(derived_profile_u_a(kac_profile, 0.3))

    values = limit_radial_cdf(tr, np.geomspace(1e-3, 1e3, 400), mass_norm=0.7)

    assert np.all(np.diff(values) >= -1e-9)
    assert values[-1] == pytest.approx(1.0, abs=1e-9)


def test_limit_radial_cdf_rejects_radii_outside_the_grid(kac_profile: CoefficientProfile) -> None:
    tr = legendre_fenchel(kac_profile)

    with pytest.raises(InvalidParameterError):
        limit_radial_cdf(tr, math.exp(9.0))
    with pytest.raises(InvalidParameterError):
        limit_radial_cdf(tr, 0.0)
    with pytest.raises(InvalidParameterError):
        limit_radial_cdf(tr, 1.0, mass_norm=0.0)


def test_limit_cdf_clips_to_the_grid_range(kac_profile: CoefficientProfile) -> None:
    cdf = limit_cdf(legendre_fenchel(kac_profile))

    np.testing.assert_allclose(cdf([0.0, 1e-6, 1e6]), [0.0, 0.0, 1.0], atol=1e-9)
    assert cdf.kind == RadialCDFKind.THEORETICAL
    assert cdf.label == "transform:kac"


def test_limit_cdf_evaluates_the_transform_once(elliptic_profile: CoefficientProfile) -> None:
    tr = legendre_fenchel(derived_profile_u_a(elliptic_profile, 0.5))
    calls: list[int] = []

    def counting(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        calls.append(s.shape[0])
        return tr.evaluator(s)

    cdf = limit_cdf(tr.model_copy(update={"evaluator": counting}))
    r = np.geomspace(0.01, 100.0, 1000)
    values = [cdf(r) for _ in range(3)]

    assert len(calls) == 1
    np.testing.assert_array_equal(values[0], values[2])
    np.testing.assert_allclose(values[0], limit_radial_cdf(tr, r, mass_norm=0.5), atol=1e-4)


def test_derived_profile_values(kac_profile: CoefficientProfile) -> None:
    u = derived_profile_u_a(kac_profile, 0.5)

    assert u.T0 == 0.5
    assert u.at(0.0) == pytest.approx(math.log(0.5), abs=1e-15)
    assert u.at(0.5) == pytest.approx(0.0, abs=1e-15)
    assert u.at(0.6) == -np.inf


@pytest.mark.parametrize("a", [0.1, 0.5, 0.9])
def test_derived_kac_profile_is_the_f1_weight(a: float, kac_profile: CoefficientProfile) -> None:
    t = np.linspace(0.0, 1.0 - a, 501)

    np.testing.assert_allclose(derived_profile_u_a(kac_profile, a)(t), kac_case2_f1(a)(t), rtol=0, atol=1e-12)


@pytest.mark.parametrize("a", [0.0, 1.0, -0.1])
def test_derived_profile_rejects_invalid_ratio(a: float, kac_profile: CoefficientProfile) -> None:
    with pytest.raises(InvalidParameterError):
        derived_profile_u_a(kac_profile, a)


def test_derived_profile_needs_finite_tail() -> None:
    short = CoefficientProfile(log_p=lambda t: np.zeros_like(t), T0=0.6, label="short")

    with pytest.raises(InvalidParameterError):
        derived_profile_u_a(short, 0.5)


@pytest.mark.parametrize(
    "case,r,a,expected",
    [
        (LimitCase.KAC_A, 0.25, 0.5, 1.0 / 3.0),
        (LimitCase.KAC_A, 0.6, 0.5, 1.0),
        (LimitCase.KAC_RESCALED, 0.4, None, 0.4),
        (LimitCase.KAC_RESCALED, 3.0, None, 1.0),
        (LimitCase.ELLIPTIC_RESCALED, 1.0, None, GOLDEN_RATIO_CONJUGATE),
        (LimitCase.KAC_UNIT_CIRCLE, 0.99, None, 0.0),
        (LimitCase.KAC_UNIT_CIRCLE, 1.01, None, 1.0),
        (LimitCase.ELLIPTIC_SPHERE, 1.0, None, 0.5),
    ],
)
def test_closed_form_cdf_values(case: LimitCase, r: float, a: float | None, expected: float) -> None:
    assert closed_form_cdf(case, r, a=a)[0] == pytest.approx(expected, rel=1e-14)


def test_elliptic_rescaled_cdf_tends_to_one() -> None:
    values = closed_form_cdf(LimitCase.ELLIPTIC_RESCALED, [10.0, 1e3, 1e8])

    assert np.all(values[:2] < 1.0)
    assert np.all(np.diff(values) > 0)
    assert values[-1] == pytest.approx(1.0, abs=1e-12)


def test_closed_form_cdf_rejects_unknown_case() -> None:
    with pytest.raises(InvalidParameterError):
        closed_form_cdf("weyl", 1.0)


def test_kac_a_needs_a_ratio() -> None:
    with pytest.raises(InvalidParameterError):
        closed_form_cdf(LimitCase.KAC_A, 0.2)


def test_kac_rescaled_density() -> None:
    assert closed_form_density(LimitCase.KAC_RESCALED, 0.5)[0] == pytest.approx(1.0 / math.pi)
    assert closed_form_density(LimitCase.KAC_RESCALED, 1.5)[0] == 0.0


@pytest.mark.parametrize(
    "case,a,r",
    [
        (LimitCase.KAC_A, 0.5, np.linspace(0.05, 0.45, 9)),
        (LimitCase.KAC_RESCALED, None, np.linspace(0.05, 0.9, 9)),
        (LimitCase.ELLIPTIC_RESCALED, None, np.geomspace(0.05, 20.0, 9)),
        (LimitCase.ELLIPTIC_SPHERE, None, np.geomspace(0.05, 20.0, 9)),
    ],
)
def test_density_integrates_to_the_cdf(case: LimitCase, a: float | None, r: np.ndarray) -> None:
    h = 1e-6
    slope = (closed_form_cdf(case, r + h, a=a) - closed_form_cdf(case, r - h, a=a)) / (2 * h)

    np.testing.assert_allclose(closed_form_density(case, r, a=a) * 2 * np.pi * r, slope, rtol=1e-5)


def test_unit_circle_has_no_density() -> None:
    with pytest.raises(InvalidParameterError):
        closed_form_density(LimitCase.KAC_UNIT_CIRCLE, 0.5)


def test_kac_fixed_degree_quadratic() -> None:
    poly = fixed_degree_limit_poly(FixedDegreeKind.KAC, 2, [1.0, 1.0, 1.0])

    assert match_roots(find_roots(poly).roots, [-1.0 + 1.0j, -1.0 - 1.0j]) <= 1e-10


def test_kac_fixed_degree_linear() -> None:
    poly = fixed_degree_limit_poly(FixedDegreeKind.KAC, 1, [1.0, 1.0])

    np.testing.assert_allclose(find_roots(poly).roots, [-1.0], atol=1e-12)


def test_elliptic_fixed_degree_magnitudes() -> None:
    poly = fixed_degree_limit_poly(FixedDegreeKind.ELLIPTIC, 2, [1.0, 1.0, 1.0])

    np.testing.assert_allclose(np.exp(poly.log_mag), [1.0 / math.sqrt(2.0), 1.0, 0.5], rtol=1e-14)


def test_fixed_degree_poly_checks_xi_length() -> None:
    with pytest.raises(InvalidParameterError):
        fixed_degree_limit_poly(FixedDegreeKind.KAC, 3, [1.0, 1.0])
    with pytest.raises(InvalidParameterError):
        fixed_degree_limit_poly(FixedDegreeKind.KAC, 0, [1.0])
