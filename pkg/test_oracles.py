import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.errors import ConfigError
from core.oracles import ProductConfig, annulus_R_circular, annulus_R_radial, disk_R


def _direct_product(q, r, terms, alternating):
    total = 1.0 - r * r
    for j in range(1, terms + 1):
        q2j = q ** (2 * j)
        factor = (1 - q2j * r * r) * (1 - q2j / (r * r)) / (1 - q2j) ** 2
        total *= factor ** (-1 if alternating and j % 2 else 1)
    return total


def test_circular_matches_direct_summation():
    assert annulus_R_circular(0.25, 0.5) == pytest.approx(_direct_product(0.25, 0.5, 500, False), rel=1e-13)


def test_radial_matches_direct_summation():
    assert annulus_R_radial(0.25, 0.5) == pytest.approx(_direct_product(0.25, 0.5, 500, True), rel=1e-13)


def test_circular_critical_circle():
    h = 1e-5
    slope = (annulus_R_circular(0.25, 0.5 + h) - annulus_R_circular(0.25, 0.5 - h)) / (2 * h)
    assert abs(slope) < 1e-8
    assert annulus_R_circular(0.25, 0.4) < annulus_R_circular(0.25, 0.5)
    assert annulus_R_circular(0.25, 0.6) < annulus_R_circular(0.25, 0.5)


def test_radial_blows_up_at_inner_circle():
    assert annulus_R_radial(0.25, 0.25 + 5e-5) > 1e3
    assert annulus_R_radial(0.25, 0.26) > 10 * annulus_R_radial(0.25, 0.5)
    assert annulus_R_radial(0.25, 0.999) < 1e-2 * annulus_R_radial(0.25, 0.5)


@given(st.floats(min_value=0.27, max_value=0.93))
def test_circular_inversion_symmetry(r):
    # the circular product is invariant under r -> q/r, hence the critical circle r = sqrt(q)
    q = 0.25
    assert annulus_R_circular(q, q / r) == pytest.approx(annulus_R_circular(q, r), rel=1e-12)


def test_annulus_arguments_checked():
    with pytest.raises(ValueError):
        annulus_R_circular(1.5, 0.5)
    with pytest.raises(ValueError):
        annulus_R_radial(0.25, 0.2)


def test_product_config():
    with pytest.raises(ConfigError):
        ProductConfig(tol=-1.0)
    with pytest.raises(ConfigError):
        ProductConfig.from_dict({"terms": 10})
    short = annulus_R_circular(0.25, 0.5, ProductConfig(max_terms=1))
    assert short == pytest.approx(_direct_product(0.25, 0.5, 1, False), rel=1e-15)


def test_disk():
    assert disk_R(0.0) == 1.0
    assert disk_R(0.6j) == pytest.approx(0.64)
    assert disk_R(2.0 + 1.0j, radius=2.0, center=2.0) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        disk_R(1.0)
    assert np.isfinite(disk_R(0.999))
