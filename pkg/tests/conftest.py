import pytest

from radshock.gas import GasConstants, GasState
from radshock.pipeline import PipelineOptions, baby_profile, gas_profile

LEFT = GasState(1.0, 0.0, 1.0)
GAS = GasConstants(1.4, 1.0)
A_DESK = 1e-3
A_BABY = 0.5

_ACCEPTANCE_LINES = []


def record_acceptance(line: str):
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def desk():
    """Gas profile at the default desk configuration."""
    return gas_profile(LEFT, GAS, A_DESK)


@pytest.fixture(scope="session")
def desk_halved():
    return gas_profile(LEFT, GAS, A_DESK, PipelineOptions().halved())


@pytest.fixture(scope="session")
def baby():
    return baby_profile(A_BABY)
