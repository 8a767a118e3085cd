import pytest
from hypothesis import settings

from zetamoment.calibration import load_calibration
from zetamoment.divisor import shared_table

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def table():
    return shared_table(400_000)


@pytest.fixture(scope="session")
def calibration():
    return load_calibration()


def pytest_terminal_summary(terminalreporter):
    import sys

    lines = []
    for mod in list(sys.modules.values()):
        lines += getattr(mod, "ACCEPTANCE_RESULTS", None) or []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
