import numpy as np
import pytest

from anisodp.noise import NoiseSource, ZeroNoise

_ACCEPTANCE = []


def record_criterion(number, name, passed, detail):
    _ACCEPTANCE.append((number, name, bool(passed), detail))


@pytest.fixture
def zero():
    return ZeroNoise()


@pytest.fixture
def src():
    return NoiseSource(12345)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number:>2}: {name} | {detail}")
