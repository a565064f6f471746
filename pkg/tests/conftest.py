import pytest

from dvhilbert import database
from dvhilbert.config import get_settings
from dvhilbert.symbols import parse_symbol
from dvhilbert.weights import StandardWeight


@pytest.fixture
def std1():
    return StandardWeight(1.0)


@pytest.fixture
def log_symbol():
    return parse_symbol("log")


@pytest.fixture
def pow075():
    return parse_symbol("pow:0.75")


@pytest.fixture
def env_settings(monkeypatch):
    """Set DVHILBERT_* variables for one test; settings are rebuilt around it."""

    def apply(**values):
        for key, value in values.items():
            monkeypatch.setenv(f"DVHILBERT_{key.upper()}", str(value))
        get_settings.cache_clear()
        return get_settings()

    yield apply
    get_settings.cache_clear()


@pytest.fixture
def fresh_cache():
    database.configure("sqlite://")
    yield
    database.configure("sqlite://")
