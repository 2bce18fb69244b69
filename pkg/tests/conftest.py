import pathlib

import pytest
from hypothesis import HealthCheck, settings

from tql import load_catalog

settings.register_profile(
    "suite",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def corpus_path() -> pathlib.Path:
    return FIXTURES / "corpus"


@pytest.fixture(scope="session")
def broken_path() -> pathlib.Path:
    return FIXTURES / "broken"


@pytest.fixture(scope="session")
def catalog(corpus_path):
    return load_catalog(corpus_path)
