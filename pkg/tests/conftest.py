import pytest

from indsense.pipeline import periodic_error_curve
from indsense.reference import reference_design


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-resolution runs (seconds to minutes)")


@pytest.fixture(scope="session")
def coarse_design():
    return reference_design(coarse=True)


@pytest.fixture(scope="session")
def coarse_geometry(coarse_design):
    return coarse_design.geometry()


@pytest.fixture(scope="session")
def coarse_drive(coarse_design, coarse_geometry):
    return coarse_design.drive(coarse_geometry)


@pytest.fixture(scope="session")
def coarse_periodic(coarse_design, coarse_geometry, coarse_drive):
    """One electrical period at 24 poses, tiled to a revolution."""
    return periodic_error_curve(coarse_design, 24, geometry=coarse_geometry,
                                drive=coarse_drive)



_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """``record(number, ok, detail)`` prints and keeps one verdict line."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
