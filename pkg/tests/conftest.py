import numpy as np
import pytest

from hetnet.analysis import GH_EDGES, KS_EDGES, RPSSL_EDGES, build_network_geometry
from hetnet.models import preset_model


@pytest.fixture(scope="session")
def gh():
    return preset_model("gh")


@pytest.fixture(scope="session")
def ks_b():
    return preset_model("ks-b")


@pytest.fixture(scope="session")
def rpssl_c():
    return preset_model("rpssl-c")


@pytest.fixture(scope="session")
def gh_geometry(gh):
    return build_network_geometry(gh, GH_EDGES)


@pytest.fixture(scope="session")
def gh_resonant_geometry():
    return build_network_geometry(preset_model("gh-resonant"), GH_EDGES)


@pytest.fixture(scope="session")
def ks_b_geometry(ks_b):
    return build_network_geometry(ks_b, KS_EDGES)


@pytest.fixture(scope="session")
def rpssl_geometry(rpssl_c):
    return build_network_geometry(rpssl_c, RPSSL_EDGES)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
