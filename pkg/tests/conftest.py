import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo", deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow], max_examples=60
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def acceptance_report(pytestconfig):
    """criterion number -> (passed, detail), printed after the run."""
    return pytestconfig.stash.setdefault(ACCEPTANCE_KEY, {})


def pytest_terminal_summary(terminalreporter, config):
    report = config.stash.get(ACCEPTANCE_KEY, {})
    if not report:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(report):
        passed, detail = report[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
