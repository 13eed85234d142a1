import pytest
from hypothesis import settings

import oracles
from cflevels import RatingScale, build_matrix

# the property criteria ask for >= 1000 cases; derandomize keeps CI stable
settings.register_profile("bulk", max_examples=1000, derandomize=True)
settings.load_profile("bulk")


@pytest.fixture(scope="session")
def scale():
    return RatingScale(1.0, 5.0)


@pytest.fixture(scope="session")
def sample_matrix(scale):
    """The 4x4 sample database (13 ratings, 1-5 scale) used throughout."""
    return build_matrix(oracles.SAMPLE_RECORDS, scale)
