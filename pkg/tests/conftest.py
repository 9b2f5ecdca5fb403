import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


# acceptance criterion results, printed at the end of the session
ACCEPTANCE_RESULTS = {}


def record_acceptance(number, passed, detail):
    ACCEPTANCE_RESULTS[number] = (bool(passed), detail)
    line = f"[acceptance {number}] {'PASS' if passed else 'FAIL'}: {detail}"
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(str(s).split()[0])):
        ok, detail = ACCEPTANCE_RESULTS[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gwn(n, seed, scale=1.0):
    return scale * np.random.default_rng(seed).standard_normal(n)
