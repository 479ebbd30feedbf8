import hypothesis
import numpy as np
import pytest

from core.geometry import assemble_domain, make_circle
from core.mityuk import MityukConfig

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=100, deadline=None)
hypothesis.settings.load_profile("fast")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-scale runs (n = 1024, 101 x 101 grids)")


@pytest.fixture
def unit_disk():
    return assemble_domain(make_circle(0.0, 1.0, n=128), [])


@pytest.fixture
def annulus():
    """0.25 < |z| < 1 at n = 256; spectral accuracy makes this as good as n = 1024 here."""
    return assemble_domain(make_circle(0.0, 1.0, n=256), [make_circle(0.0, 0.25, n=256)])


@pytest.fixture
def mityuk_cfg():
    return MityukConfig()
