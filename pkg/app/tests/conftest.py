from collections.abc import Generator
from pathlib import Path

import numpy as np
import pytest

from app.core.config import get_settings
from app.models import CoefficientProfile, SampledPolynomial
from app.utils.ensembles import ProfileKind, make_profile


@pytest.fixture(scope="function", autouse=True)
def fixture_clean_get_settings_between_tests() -> Generator[None]:
    yield

    get_settings.cache_clear()


@pytest.fixture(name="output_dir", scope="function")
def fixture_output_dir(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    out = tmp_path / "results"
    monkeypatch.setenv("EXPERIMENTS__OUTPUT_DIR", str(out))
    # force settings to use now monkeypatched environment
    get_settings.cache_clear()
    return out


@pytest.fixture(name="kac_profile", scope="session")
def fixture_kac_profile() -> CoefficientProfile:
    return make_profile(ProfileKind.KAC)


@pytest.fixture(name="elliptic_profile", scope="session")
def fixture_elliptic_profile() -> CoefficientProfile:
    return make_profile(ProfileKind.ELLIPTIC)


@pytest.fixture(name="quadratic", scope="session")
def fixture_quadratic() -> SampledPolynomial:
    # z^2 - 5z + 6 = (z - 2)(z - 3)
    return SampledPolynomial.from_coefficients([6.0, -5.0, 1.0])


@pytest.fixture(name="rng", scope="function")
def fixture_rng() -> np.random.Generator:
    return np.random.default_rng(20240101)
