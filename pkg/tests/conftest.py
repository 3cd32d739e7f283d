import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from bladesim.assembly import RpmProfile, Stage  # noqa: E402
from bladesim.config import table2_scenario  # noqa: E402
from bladesim.sections import BladeGeometry, DiskGeometry, MaterialProperties, ShaftGeometry  # noqa: E402

OMEGA_6000 = 6000 * 2 * math.pi / 60


@pytest.fixture
def material():
    return MaterialProperties()


@pytest.fixture
def shaft():
    return ShaftGeometry(0.025, 0.015, 0.5, 1)


@pytest.fixture
def disk():
    return DiskGeometry(0.35, 0.02, 4430.0)


@pytest.fixture
def blade():
    return BladeGeometry(0.04, 0.00515, 0.00065, 0.4, 2, 8, 0.3)


@pytest.fixture
def stage(shaft, disk, blade):
    return Stage(shaft, disk, blade)


@pytest.fixture
def scenario():
    return table2_scenario()


@pytest.fixture
def rpm():
    return RpmProfile(OMEGA_6000, 0.2)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_report():
    def report(criterion, passed, detail):
        line = f"CRITERION {criterion}: {'PASS' if passed else 'FAIL'} ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
