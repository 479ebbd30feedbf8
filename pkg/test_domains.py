import json

import pytest

from core.domains import (
    DomainSpec,
    check_expected,
    demo_names,
    load_demo,
    load_domain,
    probe_paths,
    resolve_domain,
)
from core.errors import ConfigError, SlitArityError, UnknownDemoError
from core.geometry import DomainGeometry, SlitDomain
from core.mityuk import CIRCULAR, RADIAL

DEMOS = [
    "annulus", "circle-sq", "disk", "rect-rect", "rect-slit", "seven-circles", "six-circles",
    "sq-circle", "sq-sq", "three-circles", "tri-tri", "two-circles-a005", "two-circles-a05",
]


def test_demo_registry():
    assert demo_names() == sorted(DEMOS)


@pytest.mark.parametrize("name", DEMOS)
def test_demo_builds(name):
    spec = load_demo(name)
    domain = spec.build(64)
    assert domain.n == 64
    assert domain.ell == spec.ell
    assert isinstance(domain, SlitDomain) == spec.is_slit
    for mix in spec.mixes:
        assert spec.slit_spec(mix).ell == spec.ell
    for label in spec.expected:
        assert label in spec.mixes


def test_unknown_demo():
    with pytest.raises(UnknownDemoError) as info:
        load_demo("four-circles")
    assert "annulus" in info.value.details["available"]


def test_slit_domain_spec():
    spec = load_demo("rect-slit")
    assert spec.is_slit and spec.ell == 1
    domain = spec.build(128)
    assert (domain.slit_start, domain.slit_end) == (-1.0, 0.0)
    assert spec.bbox == (-3.0, 3.0, -1.0, 1.0)


def test_slit_vectors():
    spec = load_demo("three-circles")
    assert spec.slit_spec("mixed").thetas == (CIRCULAR, RADIAL)
    assert spec.slit_spec().thetas == (CIRCULAR, CIRCULAR)
    with pytest.raises(ConfigError):
        spec.slit_spec("oblique")


def test_file_thetas_checked_against_ell():
    spec = DomainSpec.from_dict({**load_demo("annulus").to_dict(), "thetas": [0.0, 0.0]})
    with pytest.raises(SlitArityError):
        spec.slit_spec()


def test_domain_file_round_trip(tmp_path):
    path = tmp_path / "annulus-copy.json"
    path.write_text(json.dumps(load_demo("annulus").to_dict()))
    spec = resolve_domain(str(path))
    assert spec == load_demo("annulus")
    assert resolve_domain("annulus") == spec
    assert isinstance(spec.build(32), DomainGeometry)


def test_bad_domain_files(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigError):
        load_domain(broken)
    with pytest.raises(ConfigError):
        load_domain(tmp_path / "missing.json")
    with pytest.raises(ConfigError):
        DomainSpec.from_dict({"name": "x", "outer": {"type": "circle", "radius": 1.0}, "colour": "red"})
    with pytest.raises(ConfigError):
        DomainSpec.from_dict({"name": "x"})
    with pytest.raises(ConfigError):
        DomainSpec.from_dict({"name": "x", "outer": {"type": "square"}}).build(16)
    with pytest.raises(ConfigError):
        DomainSpec.from_dict({"name": "x", "outer": {"type": "circle"}}).build(16)


def test_slit_domain_cannot_have_holes():
    with pytest.raises(ConfigError):
        DomainSpec(name="x", outer={"type": "circle", "radius": 2.0},
                   inners=({"type": "circle", "radius": 0.5},), slit={"start": [0, 0], "end": [1, 0]})


def test_check_expected():
    spec = load_demo("three-circles")
    assert check_expected(spec, "circular", 2, 3, 0)["ok"]
    outcome = check_expected(spec, "radial", 1, 1, 0)
    assert not outcome["ok"]
    assert outcome["checks"]["n_m"] == {"expected": 0, "found": 1, "ok": False}

    ring = check_expected(load_demo("annulus"), "circular", 0, 0, 5)
    assert ring["checks"]["degenerate_ring"]["ok"]


def test_probe_paths_filtered_by_mix():
    spec = DomainSpec(
        name="x",
        outer={"type": "circle", "radius": 1.0},
        mixes={"none": []},
        probes=(
            {"label": "a", "start": [0, 0], "target": [1, 0], "expect": {"none": "to_zero"}},
            {"label": "b", "start": [0, 0], "target": [0, 1], "expect": {"other": "to_zero"}},
            {"label": "c", "start": [0, 0], "target": [-1, 0]},
        ),
    )
    assert [p["label"] for p in probe_paths(spec, "none")] == ["a", "c"]
    assert len(probe_paths(spec)) == 3
    bad = DomainSpec(name="y", outer={"type": "circle", "radius": 1.0}, probes=({"start": [0, 0]},))
    with pytest.raises(ConfigError):
        probe_paths(bad)
