import math

import pytest

from continuum_cap.scenario import disk_noise_distribution

_ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE:
        terminalreporter.write_line(line)


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion."""

    def _record(tag, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] {tag}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed

    return _record


@pytest.fixture
def disk2():
    return disk_noise_distribution(2.0, 1.0)


@pytest.fixture
def disk365():
    return disk_noise_distribution(3.65, 1.0)


E_MINUS_2 = math.e - 2.0


CELL_TOML = """\
radius_m = 500.0
alpha = 3.65
h0 = 1.0
sigma2 = 1e-13
power_budget = {power}

[density]
kind = "uniform"
u0 = 1e-4
"""


@pytest.fixture
def cell_config(tmp_path):
    def _write(power=1.0, text=None, name="cell.toml"):
        path = tmp_path / name
        path.write_text(text if text is not None else CELL_TOML.format(power=power))
        return path

    return _write
