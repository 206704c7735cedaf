import os

import pytest
from hypothesis import HealthCheck, settings

from dipole_noise.hydrogen import HydrogenState

settings.register_profile("dev", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))

CLOSED_FORM_STATES = [HydrogenState(2, 1, 1), HydrogenState(3, 2, 2), HydrogenState(3, 2, 1), HydrogenState(3, 1, 1)]


@pytest.fixture(params=CLOSED_FORM_STATES, ids=str, scope="session")
def closed_state(request):
    return request.param


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict(request):
    """Record and print one PASS/FAIL line per acceptance criterion."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        line = f"{label}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
