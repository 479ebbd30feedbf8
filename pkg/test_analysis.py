import numpy as np
import pytest

from analysis.bounds import lower_bound_check
from analysis.critical import (
    REFINE_LOCAL,
    REFINE_NONE,
    CriticalConfig,
    CriticalKind,
    CriticalPoint,
    classify_hessian,
    find_critical_points,
    morse_check,
)
from analysis.probe import (
    ProbeConfig,
    ProbePath,
    ProbeResult,
    ProbeSample,
    Trend,
    boundary_probe,
    classify_trend,
    compare_directions,
    demo_paths,
    line_scan,
    run_probe_group,
)
from analysis.sweep import (
    EXTERIOR,
    GUARD,
    INTERIOR,
    UNRELIABLE,
    GridSpec,
    ScalarField,
    SweepConfig,
    make_evaluator,
    sweep,
)
from core.domains import DomainSpec, load_demo, probe_paths
from core.errors import ConfigError
from core.mityuk import SlitSpec

NONE = SlitSpec(())


def _analytic_field(fn, n=41, box=1.0):
    grid = GridSpec(n, n, (-box, box, -box, box))
    z = grid.points()
    mask = np.full(z.shape, INTERIOR, dtype=object)
    return ScalarField(grid.xs, grid.ys, fn(z), mask)


def _small(name, n):
    return DomainSpec.from_dict({**load_demo(name).to_dict(), "n": n})


# =========================
# GRID AND FIELD
# =========================
def test_grid_parse():
    grid = GridSpec.parse("5,3", (-1.0, 1.0, 0.0, 2.0))
    assert (grid.nx, grid.ny, grid.bbox) == (5, 3, (-1.0, 1.0, 0.0, 2.0))
    assert grid.points().shape == (3, 5)
    assert GridSpec.parse("4,4,0,1,0,1").bbox == (0.0, 1.0, 0.0, 1.0)
    with pytest.raises(ConfigError):
        GridSpec.parse("4")


def test_field_rejects_bad_interior_values():
    grid = GridSpec(3, 3)
    mask = np.full((3, 3), INTERIOR, dtype=object)
    values = np.ones((3, 3))
    values[1, 1] = -1.0
    with pytest.raises(ConfigError):
        ScalarField(grid.xs, grid.ys, values, mask)


def test_workers_from_environment(monkeypatch):
    monkeypatch.setenv("MITYUK_WORKERS", "3")
    assert SweepConfig().resolved_workers == 3
    assert SweepConfig(workers=1).resolved_workers == 1


def test_disk_sweep(unit_disk, tmp_path):
    grid = GridSpec(11, 11, (-1.25, 1.25, -1.25, 1.25))
    field = sweep(unit_disk, NONE, grid, sweep_cfg=SweepConfig(workers=1))
    inside = field.interior
    z = field.grid[inside]
    exact = 1.0 - np.abs(z) ** 2
    # quadrature error grows like |alpha|**n near the rim
    deep = np.abs(z) < 0.8
    assert np.allclose(field.values[inside][deep], exact[deep], atol=1e-10)
    assert np.allclose(field.values[inside], exact, atol=1e-4)
    assert field.counts()[EXTERIOR] > 0
    assert np.all(np.isnan(field.values[~inside]))

    loaded = ScalarField.from_csv(field.to_csv(tmp_path / "disk.csv"))
    assert np.array_equal(loaded.mask, field.mask)
    assert np.array_equal(loaded.values[inside], field.values[inside])


def test_sweep_independent_of_worker_count(annulus):
    grid = GridSpec(7, 7)
    slits = SlitSpec.parse("c")
    serial = sweep(annulus, slits, grid, sweep_cfg=SweepConfig(workers=1))
    parallel = sweep(annulus, slits, grid, sweep_cfg=SweepConfig(workers=2))
    assert np.array_equal(serial.mask, parallel.mask)
    assert np.array_equal(serial.values, parallel.values, equal_nan=True)
    assert serial.to_frame().to_csv() == parallel.to_frame().to_csv()


def test_sweep_marks_guard_points(unit_disk):
    # the grid hits boundary nodes at (+-1, 0) and (0, +-1)
    field = sweep(unit_disk, NONE, GridSpec(5, 5), sweep_cfg=SweepConfig(workers=1))
    assert field.counts()[GUARD] == 4


def test_sweep_flags_points_hugging_the_boundary(unit_disk, tmp_path):
    grid = GridSpec(3, 3, (0.0, 0.99, -0.01, 0.01))
    field = sweep(unit_disk, NONE, grid, sweep_cfg=SweepConfig(workers=1))
    assert field.reliable[:, :2].all() and not field.reliable[:, 2].any()
    assert field.counts()[UNRELIABLE] == 3
    assert field.to_dict()["reliable"] is not None
    loaded = ScalarField.from_csv(field.to_csv(tmp_path / "rim.csv"))
    assert np.array_equal(loaded.reliable, field.reliable)

    relaxed = sweep(unit_disk, NONE, grid, sweep_cfg=SweepConfig(workers=1, min_resolution=0.0))
    assert relaxed.counts()[UNRELIABLE] == 0


# =========================
# CRITICAL POINTS
# =========================
def test_classify_hessian():
    cfg = CriticalConfig()
    assert classify_hessian([-2.0, -1.0], 1.0, cfg) is CriticalKind.MAXIMUM
    assert classify_hessian([-2.0, 1.0], 1.0, cfg) is CriticalKind.SADDLE
    assert classify_hessian([2.0, 1.0], 1.0, cfg) is CriticalKind.MINIMUM
    assert classify_hessian([-2.0, 1e-9], 1.0, cfg) is CriticalKind.DEGENERATE
    assert classify_hessian([-2.0, 1e-3], 1.0, cfg) is CriticalKind.DEGENERATE


def test_single_maximum_from_grid():
    field = _analytic_field(lambda z: 3.0 - np.abs(z - 0.013) ** 2)
    points = find_critical_points(field, REFINE_NONE)
    assert [p.kind for p in points] == [CriticalKind.MAXIMUM]
    assert abs(points[0].location - 0.013) < 1e-8


def test_saddle_refined():
    def f(z):
        z = np.asarray(z)
        return 3.0 + (z.real - 0.11) ** 2 - (z.imag + 0.07) ** 2

    field = _analytic_field(f)
    points = find_critical_points(field, REFINE_LOCAL, lambda a: float(f(a)))
    assert [p.kind for p in points] == [CriticalKind.SADDLE]
    assert points[0].refined
    assert abs(points[0].location - (0.11 - 0.07j)) < 1e-6


def test_ring_of_maxima_is_degenerate():
    def f(z):
        return 3.0 - (np.abs(z) ** 2 - 0.25) ** 2

    field = _analytic_field(f)
    points = find_critical_points(field, REFINE_LOCAL, lambda a: float(f(a)))
    kinds = {p.kind for p in points}
    assert CriticalKind.DEGENERATE in kinds
    assert kinds <= {CriticalKind.DEGENERATE, CriticalKind.MINIMUM}
    report = morse_check(points, 1)
    assert not report.isolated
    assert not report.passed


def test_local_refinement_needs_evaluator():
    field = _analytic_field(lambda z: 3.0 - np.abs(z) ** 2)
    with pytest.raises(ConfigError):
        find_critical_points(field, REFINE_LOCAL)


def test_morse_check_counts():
    def point(kind):
        return CriticalPoint(0j, kind, (-1.0, -1.0), 0.0, 1.0)

    points = [point(CriticalKind.MAXIMUM)] * 2 + [point(CriticalKind.SADDLE)] * 3
    report = morse_check(points, 2)
    assert (report.n_m, report.n_s, report.delta, report.expected) == (2, 3, -1, -1)
    assert report.passed
    assert not morse_check(points, 3).passed


def test_disk_has_one_maximum(unit_disk):
    field = sweep(unit_disk, NONE, GridSpec(21, 21, (-0.6, 0.6, -0.6, 0.6)), sweep_cfg=SweepConfig(workers=1))
    points = find_critical_points(field, REFINE_LOCAL, make_evaluator(unit_disk, NONE))
    assert [p.kind for p in points] == [CriticalKind.MAXIMUM]
    assert abs(points[0].location) < 1e-6
    assert morse_check(points, 0).passed


@pytest.mark.slow
def test_two_circles_circular_has_maximum_and_saddle():
    spec = _small("two-circles-a05", 128)
    domain, slits = spec.build(), spec.slit_spec("circular")
    field = sweep(domain, slits, GridSpec(41, 41, spec.bbox), sweep_cfg=SweepConfig(workers=2))
    points = find_critical_points(field, REFINE_LOCAL, make_evaluator(domain, slits))
    report = morse_check(points, 1)
    assert (report.n_m, report.n_s) == (1, 1)
    assert report.passed


@pytest.mark.slow
def test_two_circles_radial_has_no_critical_points():
    spec = _small("two-circles-a05", 128)
    domain, slits = spec.build(), spec.slit_spec("radial")
    field = sweep(domain, slits, GridSpec(41, 41, spec.bbox), sweep_cfg=SweepConfig(workers=2))
    assert find_critical_points(field, REFINE_LOCAL, make_evaluator(domain, slits)) == []


# =========================
# LOWER BOUND
# =========================
def test_lower_bound_holds_on_disk(unit_disk):
    field = sweep(unit_disk, NONE, GridSpec(9, 9), sweep_cfg=SweepConfig(workers=1))
    report = lower_bound_check(field, unit_disk)
    assert report.passed
    assert report.checked + report.excluded == field.counts()[INTERIOR]
    assert report.min_margin >= -1e-9


def test_lower_bound_reports_violations(unit_disk):
    field = _analytic_field(lambda z: np.full(z.shape, 1e-3), n=5, box=0.5)
    report = lower_bound_check(field, unit_disk)
    assert not report.passed
    assert len(report.violations) == 25
    assert report.to_dict()["violation_count"] == 25


def test_lower_bound_skips_points_next_to_the_rim():
    domain = _small("annulus", 128).build()
    field = sweep(domain, SlitSpec.parse("c"), GridSpec(21, 21, (-1.05, 1.05, -1.05, 1.05)),
                  sweep_cfg=SweepConfig(workers=1))
    # (0.945, 0) sits about one node spacing inside the outer circle
    j = int(np.argmin(np.abs(field.grid - 0.945)))
    assert not field.reliable.ravel()[j]
    report = lower_bound_check(field, domain)
    assert report.excluded == field.counts()[UNRELIABLE] > 0
    assert report.checked + report.excluded == field.counts()[INTERIOR]
    assert report.passed
    assert report.to_dict()["excluded_unreliable"] == report.excluded


# =========================
# PROBES
# =========================
def test_classify_trend_synthetic():
    d = np.geomspace(0.5, 1e-4, 10)
    assert classify_trend(d, 2.0 * d)[0] is Trend.TO_ZERO
    assert classify_trend(d, 1.0 / d)[0] is Trend.TO_INFINITY
    assert classify_trend(d, np.full(d.size, 0.7))[0] is Trend.FINITE
    trend, slope = classify_trend(d, d ** 2)
    assert trend is Trend.TO_ZERO and slope == pytest.approx(2.0)


def _result(trend, last_R):
    path = ProbePath(0.5, 1.0, label=str(last_R))
    sample = ProbeSample(0.99 + 0j, 0.01, last_R, 256, True)
    return ProbeResult(path, [sample], trend, 0.0, 1.0)


def test_compare_directions():
    assert compare_directions([_result(Trend.TO_ZERO, 0.0), _result(Trend.TO_ZERO, 0.0)]) is Trend.TO_ZERO
    assert compare_directions([_result(Trend.TO_ZERO, 0.0), _result(Trend.FINITE, 1.0)]) is Trend.DIVERGENT
    assert compare_directions([_result(Trend.FINITE, 1.0), _result(Trend.FINITE, 2.0)]) is Trend.DIVERGENT
    assert compare_directions([_result(Trend.FINITE, 1.0), _result(Trend.FINITE, 1.01)]) is Trend.FINITE


def test_probe_path():
    path = ProbePath.parse("0,0:1,0:5:1e-2")
    assert path.distances() == pytest.approx(np.geomspace(1.0, 1e-2, 5))
    assert path.alphas()[-1] == pytest.approx(0.99)
    with pytest.raises(ConfigError):
        ProbePath(1.0, 1.0)


def test_disk_probe_goes_to_zero():
    path = ProbePath(0.0, 1.0, points=6, min_fraction=1e-2)
    result = boundary_probe(_small("disk", 256), NONE, path, probe_cfg=ProbeConfig(zero_ratio=0.05))
    assert result.trend is Trend.TO_ZERO
    assert not result.truncated
    assert result.n_used > 256
    assert all(s.reliable for s in result.samples)


def test_radial_annulus_probe_goes_to_infinity():
    path = ProbePath(0.45, 0.25, points=6, min_fraction=1e-2)
    result = boundary_probe(_small("annulus", 128), SlitSpec.parse("r"), path,
                            probe_cfg=ProbeConfig(infinity_ratio=10.0))
    assert result.trend is Trend.TO_INFINITY
    assert result.slope < -0.5


def test_probe_beyond_node_cap_is_unreliable(unit_disk):
    path = ProbePath(0.0, 1.0, points=6, min_fraction=1e-3)
    result = boundary_probe(unit_disk, NONE, path)
    assert result.n_used == unit_disk.n
    assert not result.samples[-1].reliable
    assert result.samples[0].reliable


def test_probe_group_from_two_directions():
    paths = [ProbePath(0.0, 1.0, 5, 1e-2, "along x", "east"),
             ProbePath(0.5 + 0.5j, 1.0, 5, 1e-2, "diagonal", "east")]
    outcome = run_probe_group(_small("disk", 256), NONE, paths, probe_cfg=ProbeConfig(zero_ratio=0.1))
    assert outcome["groups"] == {"east": Trend.TO_ZERO}
    assert [r.path.label for r in outcome["probes"]] == ["along x", "diagonal"]


@pytest.mark.slow
def test_rect_slit_endpoint_depends_on_direction():
    spec = _small("rect-slit", 256)
    entries = [e for e in probe_paths(spec) if e.get("group") == "endpoint-0"]
    assert len(entries) == 2
    radial = run_probe_group(spec, spec.slit_spec("radial"), demo_paths(entries), probe_cfg=ProbeConfig(n_max=1024))
    assert radial["groups"] == {"endpoint-0": Trend.DIVERGENT}
    circular = run_probe_group(spec, spec.slit_spec("circular"), demo_paths(entries),
                               probe_cfg=ProbeConfig(n_max=1024))
    assert circular["groups"] == {"endpoint-0": Trend.TO_ZERO}


def test_line_scan(unit_disk):
    frame = line_scan(unit_disk, NONE, -1.5, 1.5, points=7)
    assert frame["status"].tolist() == [EXTERIOR, GUARD, INTERIOR, INTERIOR, INTERIOR, GUARD, EXTERIOR]
    inside = frame["status"] == INTERIOR
    assert np.allclose(frame.loc[inside, "R"], 1.0 - frame.loc[inside, "x"] ** 2, atol=1e-10)
