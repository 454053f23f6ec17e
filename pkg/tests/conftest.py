import pytest

from crowdsteady.models import Domain, Model
from crowdsteady.verification import DEFAULT_PARAMS, VerificationContext


@pytest.fixture(scope="session")
def ctx():
    """Shared branch/basis cache across the whole run (branches are minutes)."""
    return VerificationContext(n_grid=1024)


@pytest.fixture(scope="session")
def params_i():
    return DEFAULT_PARAMS[Model.I]


@pytest.fixture(scope="session")
def params_ii():
    return DEFAULT_PARAMS[Model.II]


@pytest.fixture(scope="session")
def dom1():
    return Domain(1, 1024)


@pytest.fixture(scope="session")
def dom2():
    return Domain(2, 1024)
