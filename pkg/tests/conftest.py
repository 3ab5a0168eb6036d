import pytest

from primcensus import presets
from primcensus.numfield import load_field


@pytest.fixture(scope="session")
def field_q():
    return load_field(presets.rational_field())


@pytest.fixture(scope="session")
def field_qi():
    return load_field(presets.gaussian_field())


@pytest.fixture(scope="session")
def field_sqrt2():
    return load_field(presets.sqrt2_field())


@pytest.fixture(scope="session")
def field_biquad():
    return load_field(presets.biquadratic_field())
