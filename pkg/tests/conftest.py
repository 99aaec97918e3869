import pytest

import acceptance_log
from tailmix import CopulaFamily, ScarStationary, tails

GAUSS = CopulaFamily.gaussian()


@pytest.fixture(scope="session")
def scar_gauss():
    """SCAR law with beta 0.97, sigma 0.2 and mean correlation 0.5."""
    return ScarStationary.with_mean(0.5, 0.97, 0.2)


@pytest.fixture(scope="session")
def scar_gauss_curve(scar_gauss):
    """Deep-tail curve of the Gaussian SCAR mixture, 100 points per decade."""
    grid = tails.log_grid(1e-3, 1e-13, 100)
    return tails.tail_curve(GAUSS, scar_gauss, grid)


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.RESULTS:
            terminalreporter.write_line(line)
