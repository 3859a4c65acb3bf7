import numpy as np
import pytest

from movingwave.geometry import MovingDomain, ObservationFrame
from movingwave.wavesolver import CoefficientSet, GridSpec


@pytest.fixture(scope="session")
def static_domain():
    return MovingDomain.interval("-1", "1", 0.0, 2.5)


@pytest.fixture(scope="session")
def static_frame(static_domain):
    return ObservationFrame.for_domain(static_domain, 1.25, [0.0], resolution=(94, 60))


@pytest.fixture(scope="session")
def reference_grid():
    return GridSpec(59, 94, 0.0, 2.5)


@pytest.fixture(scope="session")
def free():
    return CoefficientSet()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line; printed again in the terminal summary."""

    def record(number, title, passed, detail, seconds, limit):
        timing_ok = seconds < limit
        status = "PASS" if passed and timing_ok else "FAIL"
        line = (f"criterion {number} [{status}] {title}: {detail}; "
                f"runtime {seconds:.2f} s (limit {limit:g} s)")
        _CRITERIA.append((number, line))
        print(line)
        return passed and timing_ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA, key=lambda item: str(item[0])):
        terminalreporter.write_line(line)
