import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dyqg.intertwine import VermaCache

settings.register_profile("dyqg", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("dyqg")


@pytest.fixture(scope="session")
def verma_cache():
    return VermaCache()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
