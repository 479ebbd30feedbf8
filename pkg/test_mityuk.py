import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from core.domains import load_demo
from core.errors import BoundaryIndeterminateError, ConfigError, PointNotInteriorError, SlitArityError
from core.geometry import SlitDomain, assemble_domain, make_circle, make_polygon
from core.mityuk import (
    CIRCULAR,
    RADIAL,
    MityukConfig,
    SlitSpec,
    boundary_condition_residuals,
    evaluate,
    mityuk_values,
    slit_extents,
)
from core.oracles import annulus_R_circular, annulus_R_radial, disk_R, square_center_R

CIRC = SlitSpec.parse("c")
RAD = SlitSpec.parse("r")
NONE = SlitSpec(())
DISK = assemble_domain(make_circle(0.0, 1.0, n=128), [])


def _annulus(n):
    return assemble_domain(make_circle(0.0, 1.0, n=n), [make_circle(0.0, 0.25, n=n)])


# =========================
# SLIT VECTORS AND CONFIG
# =========================
def test_slit_spec_parse():
    assert SlitSpec.parse("c, r").thetas == (CIRCULAR, RADIAL)
    assert SlitSpec.parse("pi/2,0,circular,radial").labels == ["circular", "radial", "circular", "radial"]
    assert SlitSpec.parse(["c", 0.0]).thetas == (CIRCULAR, RADIAL)
    assert SlitSpec.parse("").ell == 0
    with pytest.raises(ConfigError):
        SlitSpec.parse("diagonal")


def test_oblique_needs_experimental_flag():
    with pytest.raises(ConfigError):
        SlitSpec.parse("0.3")
    assert SlitSpec.parse("0.3", experimental=True).labels == ["oblique:0.3"]


def test_config_from_dict():
    cfg = MityukConfig.from_dict({"solver": {"method": "iterative"}, "boundary_values": True})
    assert cfg.solver.method == "iterative"
    assert MityukConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError):
        MityukConfig.from_dict({"fmm": True})


# =========================
# ORACLES
# =========================
@given(st.floats(min_value=0.0, max_value=0.8), st.floats(min_value=0.0, max_value=2 * np.pi))
def test_disk_matches_moebius_formula(radius, angle):
    alpha = radius * np.exp(1j * angle)
    result = evaluate(DISK, alpha, NONE)
    assert abs(result.R - disk_R(alpha)) <= 1e-10


def test_disk_center(unit_disk):
    result = evaluate(unit_disk, 0.0, NONE)
    assert result.h0 == pytest.approx(0.0, abs=1e-13)
    assert result.R == pytest.approx(1.0, abs=1e-13)


def test_annulus_circular_matches_product(annulus):
    result = evaluate(annulus, 0.5, CIRC)
    assert result.R == pytest.approx(annulus_R_circular(0.25, 0.5), rel=1e-10)


def test_annulus_radial_matches_product(annulus):
    result = evaluate(annulus, 0.5, RAD)
    assert result.R == pytest.approx(annulus_R_radial(0.25, 0.5), rel=1e-10)


@pytest.mark.parametrize("r", [0.3, 0.45, 0.7, 0.85])
def test_annulus_off_critical_circle(annulus, r):
    alpha = r * np.exp(0.7j)
    assert evaluate(annulus, alpha, CIRC).R == pytest.approx(annulus_R_circular(0.25, r), rel=1e-9)
    assert evaluate(annulus, alpha, RAD).R == pytest.approx(annulus_R_radial(0.25, r), rel=1e-9)


def test_value_triple_is_consistent(annulus):
    result = evaluate(annulus, 0.3 + 0.4j, CIRC)
    assert result.m == pytest.approx(np.log(result.R) / (2 * np.pi), rel=1e-14)
    assert result.c == pytest.approx(1.0 / result.R, rel=1e-14)
    assert result.robin == -result.m


def test_critical_circle(annulus):
    h = 1e-4

    def slope(r):
        return (evaluate(annulus, r + h, CIRC).R - evaluate(annulus, r - h, CIRC).R) / (2 * h)

    assert abs(slope(0.5)) <= 1e-6
    assert slope(0.4) > 0 > slope(0.6)


def test_radial_monotone_decreasing():
    domain = _annulus(512)
    radii = np.linspace(0.26, 0.9, 12)
    values = [evaluate(domain, r, RAD).R for r in radii]
    assert np.all(np.diff(values) < 0)
    assert values[0] > 10 * evaluate(domain, 0.5, RAD).R


@pytest.mark.slow
def test_radial_monotone_over_full_range():
    domain = _annulus(2048)
    radii = np.linspace(0.26, 0.99, 30)
    values = np.array([evaluate(domain, r, RAD).R for r in radii])
    assert np.all(np.diff(values) < 0)
    assert values == pytest.approx([annulus_R_radial(0.25, r) for r in radii], rel=1e-7)


def test_rotation_invariance(annulus):
    base = evaluate(annulus, 0.6, CIRC).R
    for phi in (0.3, 1.9, 4.0):
        assert evaluate(annulus, 0.6 * np.exp(1j * phi), CIRC).R == pytest.approx(base, rel=1e-12)


def test_discretization_converges():
    alpha = 0.6 + 0.2j
    coarse = evaluate(_annulus(128), alpha, CIRC).R
    fine = evaluate(_annulus(256), alpha, CIRC).R
    assert abs(coarse - fine) <= 1e-10


def test_iterative_solver_agrees(annulus):
    iterative = MityukConfig.from_dict({"solver": {"method": "iterative", "tol": 1e-14}})
    assert evaluate(annulus, 0.4j, RAD, iterative).R == pytest.approx(evaluate(annulus, 0.4j, RAD).R, rel=1e-11)


# =========================
# SLIT PARAMETERS AND BOUNDARY VALUES
# =========================
def test_slit_parameters(annulus):
    circ = evaluate(annulus, 0.5, CIRC)
    assert 0.0 < circ.slit_params[0] < 1.0
    rad = evaluate(annulus, 0.5, RAD)
    assert -np.pi < rad.slit_params[0] <= np.pi
    # symmetric about the real axis, so the radial slit lies on it
    assert abs(np.sin(rad.slit_params[0])) < 1e-8


@pytest.mark.parametrize("slits", [CIRC, RAD], ids=["circular", "radial"])
def test_boundary_conditions_hold(annulus, slits):
    cfg = MityukConfig(boundary_values=True)
    result = evaluate(annulus, 0.35 - 0.2j, slits, cfg)
    check = boundary_condition_residuals(annulus, slits, result.boundary_values)
    assert check["outer_modulus_error"] <= 1e-8
    assert max(check["component_spread"]) <= 1e-8


def test_slit_extents_match_parameters(annulus):
    cfg = MityukConfig(boundary_values=True)
    circ = evaluate(annulus, 0.5j, CIRC, cfg)
    extent = slit_extents(annulus, CIRC, circ.boundary_values)[0]
    assert extent["type"] == "circular"
    assert extent["radius"] == pytest.approx(circ.slit_params[0], rel=1e-8)

    rad = evaluate(annulus, 0.5j, RAD, cfg)
    extent = slit_extents(annulus, RAD, rad.boundary_values)[0]
    assert extent["angle"] == pytest.approx(rad.slit_params[0], abs=1e-8)
    lo, hi = extent["radius_range"]
    assert 0.0 < lo < hi < 1.0


def test_boundary_values_not_returned_by_default(annulus):
    result = evaluate(annulus, 0.5, CIRC)
    assert result.boundary_values is None
    assert "boundary_values" not in result.to_record()


def test_oblique_angle_runs_when_experimental(annulus):
    slits = SlitSpec((np.pi / 4,), experimental=True)
    result = evaluate(annulus, 0.5, slits)
    assert np.isfinite(result.R) and result.R > 0


# =========================
# ERRORS
# =========================
def test_point_in_hole(annulus):
    with pytest.raises(PointNotInteriorError):
        evaluate(annulus, 0.1, CIRC)


def test_point_outside(annulus):
    with pytest.raises(PointNotInteriorError):
        evaluate(annulus, 1.2j, RAD)


def test_point_on_boundary(annulus):
    with pytest.raises(BoundaryIndeterminateError):
        evaluate(annulus, complex(annulus.outer.nodes[3]), CIRC)


def test_slit_arity(annulus):
    with pytest.raises(SlitArityError):
        evaluate(annulus, 0.5, SlitSpec.parse("c,c"))


# =========================
# OPEN-UP FOR STRAIGHT SLITS
# =========================
@pytest.fixture(scope="module")
def slit_pair():
    outer = make_circle(-0.5, 2.0, n=512)
    return SlitDomain(outer, -1.0, 0.0), SlitDomain(outer, 0.0, -1.0)


@pytest.mark.parametrize("slits", [CIRC, RAD], ids=["circular", "radial"])
def test_openup_independent_of_normalization(slit_pair, slits):
    forward, backward = slit_pair
    alpha = 0.3 + 0.8j
    assert evaluate(forward, alpha, slits).R == pytest.approx(evaluate(backward, alpha, slits).R, rel=1e-9)


@pytest.mark.parametrize("slits", [CIRC, RAD], ids=["circular", "radial"])
def test_openup_point_symmetry(slit_pair, slits):
    # z -> -1 - z maps the domain onto itself
    domain, _ = slit_pair
    alpha = 0.2 + 0.6j
    a = evaluate(domain, alpha, slits).R
    assert evaluate(domain, -1.0 - alpha, slits).R == pytest.approx(a, rel=1e-9)
    assert evaluate(domain, np.conj(alpha), slits).R == pytest.approx(a, rel=1e-9)


def test_openup_rejects_points_on_slit(slit_pair):
    domain, _ = slit_pair
    with pytest.raises(PointNotInteriorError):
        evaluate(domain, -0.5, CIRC)


def test_openup_needs_one_slit_type(slit_pair):
    domain, _ = slit_pair
    with pytest.raises(SlitArityError):
        evaluate(domain, 1.0j, NONE)


def test_mityuk_values_direct_call(annulus):
    assert mityuk_values(annulus, 0.5, CIRC).R == evaluate(annulus, 0.5, CIRC).R


@pytest.mark.slow
@pytest.mark.parametrize("mix", ["circular", "radial", "mixed"])
def test_three_circles_boundary_conditions(mix):
    spec = load_demo("three-circles")
    domain = spec.build()
    slits = spec.slit_spec(mix)
    result = evaluate(domain, 0.3j, slits, MityukConfig(boundary_values=True))
    check = boundary_condition_residuals(domain, slits, result.boundary_values)
    assert check["outer_modulus_error"] <= 1e-8
    assert max(check["component_spread"]) <= 1e-8


# =========================
# POLYGONS AND SLITS
# =========================
SQUARE = [1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]


def test_square_center_matches_closed_form():
    square = assemble_domain(make_polygon(SQUARE, n=512), [])
    assert evaluate(square, 0.0, NONE).R == pytest.approx(square_center_R(), rel=1e-5)


def test_square_center_scales_with_side():
    square = assemble_domain(make_polygon([2 * v for v in SQUARE], n=512), [])
    assert evaluate(square, 0.0, NONE).R == pytest.approx(square_center_R(2.0), rel=1e-5)


@pytest.mark.slow
def test_square_center_at_full_resolution():
    square = assemble_domain(make_polygon(SQUARE, n=4096), [])
    assert evaluate(square, 0.0, NONE).R == pytest.approx(square_center_R(), rel=1e-8)


@pytest.mark.slow
@pytest.mark.parametrize("mix", ["circular", "radial"])
def test_square_minus_disk_boundary_conditions(mix):
    spec = load_demo("sq-circle")
    domain = spec.build(n=4096)
    slits = spec.slit_spec(mix)
    result = evaluate(domain, 0.6j, slits, MityukConfig(boundary_values=True))
    check = boundary_condition_residuals(domain, slits, result.boundary_values)
    assert check["outer_modulus_error"] <= 1e-8
    assert max(check["component_spread"]) <= 1e-8


def test_square_minus_disk_symmetry():
    domain = load_demo("sq-circle").build(n=512)
    values = [evaluate(domain, a, CIRC).R for a in (0.6j, 0.6, -0.6j, -0.6)]
    assert np.allclose(values, values[0], rtol=1e-7)


def test_rect_slit_values():
    spec = load_demo("rect-slit")
    domain = spec.build(n=256)
    for mix in ("circular", "radial"):
        first = evaluate(domain, 1.5 + 0.3j, spec.slit_spec(mix))
        again = evaluate(domain, 1.5 - 0.3j, spec.slit_spec(mix))
        assert np.isfinite(first.R) and first.R > 0
        assert again.R == pytest.approx(first.R, rel=1e-8)
