from importlib import resources

import pytest


@pytest.fixture(scope="session")
def lt2_source():
    return resources.files("mpcprobe").joinpath("data/two_bit_less_than.cho").read_text()
