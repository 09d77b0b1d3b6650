import time

import pytest

from mbshape.mismatch import build_gain_map

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def gmap8_timed():
    """Full 201 x 201 64QAM penalty map (5-25 dB, 0.1 dB) and its build time."""
    t0 = time.perf_counter()
    g = build_gain_map(8, 5.0, 25.0, 0.1)
    return g, time.perf_counter() - t0


@pytest.fixture(scope="session")
def gmap8(gmap8_timed):
    return gmap8_timed[0]


@pytest.fixture(scope="session")
def gmap16():
    """256QAM penalty map, 5-30 dB in 0.1 dB steps."""
    return build_gain_map(16, 5.0, 30.0, 0.1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
