import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# Property tests run whole DSP chains; per-example deadlines just add noise.
settings.register_profile(
    "dafjam",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("dafjam")

# One line per acceptance criterion, filled in by tests/test_acceptance.py and
# echoed after the run so the verdicts survive output capture.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(0xD4F)
