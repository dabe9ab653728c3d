import pytest
from hypothesis import settings

from tests.helpers import toy_workload
from verisim.dataio import default_workload

# the whole suite is reproducible run to run, property tests included
settings.register_profile("deterministic", derandomize=True)
settings.load_profile("deterministic")


@pytest.fixture(scope="session")
def fitted_workload():
    """The calibrated synthetic workload fitted with the reference recipe."""
    return default_workload()


@pytest.fixture()
def toy_wl():
    return toy_workload()
