import numpy as np
import pytest

from flist.forward import forward_map
from flist.grids import Field, RealGrid, SpectralGrid


@pytest.fixture(scope="session")
def small_x():
    return RealGrid(-16.0, 16.0, 512)


@pytest.fixture(scope="session")
def small_z():
    return SpectralGrid.build(z_cut=16.0, n=256)


@pytest.fixture(scope="session")
def gauss_small(small_x):
    return Field.from_values(small_x, 0.25 * np.exp(-small_x.nodes**2))


@pytest.fixture(scope="session")
def data_small(gauss_small, small_z):
    return forward_map(gauss_small, small_z)


@pytest.fixture(scope="session")
def ref_x():
    return RealGrid(-20.0, 20.0, 2048)


@pytest.fixture(scope="session")
def ref_z():
    return SpectralGrid.build()


@pytest.fixture(scope="session")
def gauss_ref(ref_x):
    return Field.from_values(ref_x, 0.25 * np.exp(-ref_x.nodes**2))


@pytest.fixture(scope="session")
def data_ref(gauss_ref, ref_z):
    return forward_map(gauss_ref, ref_z)


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """criterion number -> one-line verdict, echoed in the terminal summary."""
    return request.config.stash.setdefault(ACCEPTANCE, {})


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines):
            terminalreporter.write_line(lines[key])
