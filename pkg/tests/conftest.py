import pytest

from conemet import solve_unitarizing_parameters


@pytest.fixture(scope="session")
def solved_n3():
    """The standard three-point configuration, solved once per session."""
    return solve_unitarizing_parameters([0.0, 1.0, -1.0], [0.5, 0.5, 0.5])
