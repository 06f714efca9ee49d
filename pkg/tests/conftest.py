import numpy as np
import pytest

from chlab import forward_scattering as fs
from chlab.potential_model import SpatialGrid, build_profile, sech2_profile, zero_profile
from chlab.soliton_rh import DiscreteSpectrum, sample_solution


@pytest.fixture(scope="session")
def small_sech2():
    return sech2_profile(0.1, 4.0)


@pytest.fixture(scope="session")
def small_sech2_data(small_sech2):
    return fs.scatter(small_sech2)


@pytest.fixture(scope="session")
def depression():
    return sech2_profile(-0.1, 4.0)


@pytest.fixture(scope="session")
def vacuum():
    return zero_profile()


def soliton_profile(poles, constants, L=60.0, n=2048):
    grid = SpatialGrid.uniform(L, n)
    sol = sample_solution(DiscreteSpectrum(tuple(poles), tuple(constants)), 0.0, (-L - 20, L + 20), 4001,
                          x_grid=grid.nodes)
    return build_profile(sol.u_on_x, grid)


@pytest.fixture(scope="session")
def one_soliton():
    return soliton_profile([0.3], [1.0])


@pytest.fixture(scope="session")
def two_soliton():
    return soliton_profile([0.2, 0.35], [1.0, 1.0])


@pytest.fixture
def report(request, capsys):
    """Print one acceptance line immediately and again in the terminal summary."""
    lines = request.config.__dict__.setdefault("_chlab_acceptance", [])

    def emit(crit: int, ok: bool, detail: str):
        line = f"CRITERION {crit}: {'PASS' if ok else 'FAIL'} | {detail}"
        lines.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.__dict__.get("_chlab_acceptance", [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
