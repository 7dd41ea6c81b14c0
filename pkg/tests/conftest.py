import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from deddens.hilbert import MeasureSpace

settings.register_profile(
    "deddens",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("deddens")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def uniform2():
    return MeasureSpace.uniform(2)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
