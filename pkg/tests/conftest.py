import numpy as np
import pytest

from mpcquant import scenarios
from mpcquant.reduction_holonomy import PrequantizationModel

_CRITERIA: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str = "") -> None:
    line = f"CRITERION {number}: {'PASS' if passed else 'FAIL'} {detail}".rstrip()
    _CRITERIA[number] = (passed, line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[k][1])


@pytest.fixture(scope="session")
def oscillator_models():
    return {n: PrequantizationModel(scenarios.harmonic(n)) for n in (1, 2, 3)}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
