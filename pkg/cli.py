#!/usr/bin/env python3
"""
Command-line front end.

    python main.py compute  --domain annulus --theta c --alpha 0.5,0
    python main.py sweep    --domain three-circles --theta c,c --grid 51,51 --out field.csv
    python main.py probe    --domain annulus --theta r --path 0.45,0:0.25,0:10:1e-3
    python main.py critical --domain two-circles-a05 --field field.csv --refine local
    python main.py boundcheck --domain annulus --field field.csv
    python main.py scan     --domain annulus --theta r --line -1,0:1,0:201
    python main.py demo     three-circles --grid 51,51
    python main.py demos

--domain takes a domain file or the name of a shipped demo. Every report
echoes the effective configuration; passing a report back through --config
re-runs the same computation.
"""

import argparse
import json
import logging
import re
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from analysis.bounds import lower_bound_check
from analysis.critical import REFINE_LOCAL, REFINE_NONE, CriticalConfig, find_critical_points, morse_check
from analysis.probe import ProbeConfig, ProbePath, demo_paths, expected_trend, line_scan, run_probe_group
from analysis.sweep import GridSpec, ScalarField, SweepConfig, make_evaluator, sweep
from core.domains import DomainSpec, check_expected, demo_names, load_demo, probe_paths, resolve_domain
from core.errors import ConfigError, MityukError
from core.geometry import Domain, SlitDomain
from core.mityuk import MityukConfig, SlitSpec, boundary_condition_residuals, evaluate, slit_extents
from core.solver import SolverConfig
from utils.report_writer import error_record, write_report, write_table

logger = logging.getLogger("mityuk")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_ERROR = 2


# =========================
# RUN CONFIG
# =========================
@dataclass
class RunConfig:
    """
    Everything one command needs; mirrors the command-line flags.

    Exactly one of alpha (point mode), grid (field mode) or paths (probe
    mode) drives a computation.
    """

    domain: Optional[str] = None
    theta: Optional[str] = None
    mix: Optional[str] = None
    alpha: Optional[str] = None
    grid: Optional[str] = None
    paths: List[str] = field(default_factory=list)
    line: Optional[str] = None
    field_file: Optional[str] = None
    n: Optional[int] = None
    method: str = "direct"
    tol: float = 1e-14
    max_iter: int = 100
    refine: str = REFINE_LOCAL
    workers: Optional[int] = None
    boundary_values: bool = False
    out: Optional[str] = None
    format: Optional[str] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError("unknown keys in run config", {"keys": sorted(unknown)})
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def require(self, *names: str) -> None:
        missing = [name for name in names if not getattr(self, name)]
        if missing:
            raise ConfigError("missing required settings", {"missing": missing})

    def exclusive(self, chosen: str) -> None:
        modes = {"alpha": self.alpha, "grid": self.grid, "paths": self.paths}
        others = [k for k, v in modes.items() if v and k != chosen]
        if others:
            raise ConfigError(f"{chosen} mode cannot be combined with {', '.join(others)}")

    def mityuk_config(self) -> MityukConfig:
        solver = SolverConfig(method=self.method, tol=self.tol, max_iter=self.max_iter)
        return MityukConfig(solver=solver, boundary_values=self.boundary_values)

    def domain_spec(self) -> DomainSpec:
        self.require("domain")
        spec = resolve_domain(self.domain)  # type: ignore[arg-type]
        if self.n:
            spec = DomainSpec.from_dict({**spec.to_dict(), "n": self.n})
        return spec

    def slits(self, spec: DomainSpec) -> SlitSpec:
        if self.theta is not None:
            slits = SlitSpec.parse(self.theta)
            slits.check_arity(spec.ell)
            return slits
        return spec.slit_spec(self.mix)


def parse_complex(text: str) -> complex:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError as e:
        raise ConfigError(f"cannot read point {text!r}") from e
    raise ConfigError(f"point must be RE or RE,IM, got {text!r}")


# Options whose values may start with a minus sign, e.g. --alpha -0.5,0.
COORDINATE_OPTIONS = ("--alpha", "--line", "--path", "--grid")
NEGATIVE_VALUE = re.compile(r"^-(\d|\.\d)")


def attach_negative_values(argv: Sequence[str]) -> List[str]:
    """Rewrite '--alpha -0.5,0' as '--alpha=-0.5,0' so argparse does not read the value as a flag."""
    out: List[str] = []
    i = 0
    while i < len(argv):
        token = argv[i]
        if token in COORDINATE_OPTIONS and i + 1 < len(argv) and NEGATIVE_VALUE.match(argv[i + 1]):
            out.append(f"{token}={argv[i + 1]}")
            i += 2
            continue
        out.append(token)
        i += 1
    return out


def _out_path(cfg: RunConfig, default: str) -> Path:
    return Path(cfg.out or default)


def _print_header(title: str) -> None:
    print("\n" + "=" * 60)
    print(title)
    print("=" * 60)


def _slit_label(slits: SlitSpec) -> str:
    return ",".join(slits.labels) or "-"


# =========================
# COMMANDS
# =========================
def cmd_compute(cfg: RunConfig) -> int:
    """Single evaluation of R, m and the slit parameters."""
    cfg.require("alpha")
    cfg.exclusive("alpha")
    spec = cfg.domain_spec()
    slits = cfg.slits(spec)
    domain = spec.build()
    result = evaluate(domain, parse_complex(cfg.alpha), slits, cfg.mityuk_config())  # type: ignore[arg-type]

    record = result.to_record()
    if result.boundary_values is not None and not isinstance(domain, SlitDomain):
        record["boundary_check"] = boundary_condition_residuals(domain, slits, result.boundary_values)
        record["slit_extents"] = slit_extents(domain, slits, result.boundary_values)

    _print_header(f"📐 {spec.name}  alpha = {result.alpha}  slits = {_slit_label(slits)}")
    print(f"R        = {result.R:.15g}")
    print(f"m        = {result.m:.15g}")
    print(f"c        = {result.c:.15g}")
    for k, (label, p) in enumerate(zip(slits.labels, result.slit_params), start=1):
        unit = "radius" if label == "circular" else "angle"
        print(f"slit {k}   = {label} {unit} {p:.12g}")
    print(f"residual = {result.residual:.2e}   max h spread = {result.max_constancy_residual:.2e}")
    if "boundary_check" in record:
        print(f"||Phi| - 1| on outer curve = {record['boundary_check']['outer_modulus_error']:.2e}")

    if cfg.format == "csv":
        path = write_table(_out_path(cfg, "mityuk_point.csv"), pd.DataFrame([result.csv_row()]))
    else:
        path = write_report(_out_path(cfg, "mityuk_point.json"), "compute", record, cfg.to_dict())
    print(f"📄 wrote {path}")
    return EXIT_OK


def _field_for(cfg: RunConfig, spec: DomainSpec, domain: Domain, slits: SlitSpec) -> ScalarField:
    if cfg.field_file:
        return ScalarField.from_csv(cfg.field_file, {"source": cfg.field_file})
    grid = GridSpec.parse(cfg.grid or "101,101", spec.bbox)
    return sweep(domain, slits, grid, cfg.mityuk_config(), SweepConfig(workers=cfg.workers),
                 {"domain": spec.name, "slit_types": slits.labels})


def cmd_sweep(cfg: RunConfig) -> int:
    """R over a lattice; CSV (x, y, mask, R) or JSON."""
    cfg.exclusive("grid")
    spec = cfg.domain_spec()
    slits = cfg.slits(spec)
    field_ = _field_for(cfg, spec, spec.build(), slits)

    _print_header(f"📊 sweep {spec.name}  slits = {_slit_label(slits)}")
    for status, count in field_.counts().items():
        print(f"{status:16s} {count}")
    if cfg.format == "json":
        path = write_report(_out_path(cfg, "mityuk_field.json"), "sweep", field_.to_dict(), cfg.to_dict())
    else:
        path = field_.to_csv(_out_path(cfg, "mityuk_field.csv"))
    print(f"📄 wrote {path}")
    return EXIT_OK


def _paths_for(cfg: RunConfig, spec: DomainSpec) -> List[ProbePath]:
    if cfg.paths:
        return [ProbePath.parse(p) for p in cfg.paths]
    entries = probe_paths(spec, cfg.mix)
    if not entries:
        raise ConfigError("no probe path given and the domain file defines none", {"domain": spec.name})
    return demo_paths(entries)


def cmd_probe(cfg: RunConfig) -> int:
    """Boundary probes with trend classification."""
    cfg.exclusive("paths")
    spec = cfg.domain_spec()
    slits = cfg.slits(spec)
    outcome = run_probe_group(spec, slits, _paths_for(cfg, spec), cfg.mityuk_config(), ProbeConfig())

    _print_header(f"🔍 probes {spec.name}  slits = {_slit_label(slits)}")
    for r in outcome["probes"]:
        last = r.last_reliable
        tail = "-" if last is None else f"R={last.R:.4e} at d={last.distance:.1e} (n={last.n})"
        name = r.path.label or str(r.path.target)
        print(f"{name:28s} {r.trend.value:22s} slope={r.slope:+.3f}  {tail}")
    for name, trend in outcome["groups"].items():
        print(f"group {name:22s} {trend.value}")

    result = {"probes": [r.to_dict() for r in outcome["probes"]],
              "groups": {k: v.value for k, v in outcome["groups"].items()}}
    path = write_report(_out_path(cfg, "mityuk_probe.json"), "probe", result, cfg.to_dict())
    print(f"📄 wrote {path}")
    return EXIT_OK


def cmd_critical(cfg: RunConfig) -> int:
    """Critical points of R plus the Morse count check."""
    spec = cfg.domain_spec()
    slits = cfg.slits(spec)
    domain = spec.build()
    field_ = _field_for(cfg, spec, domain, slits)
    evaluator = make_evaluator(domain, slits, cfg.mityuk_config()) if cfg.refine == REFINE_LOCAL else None
    points = find_critical_points(field_, cfg.refine, evaluator, CriticalConfig())
    report = morse_check(points, spec.ell)

    _print_header(f"🔍 critical points {spec.name}  slits = {_slit_label(slits)}")
    for p in points:
        print(f"{p.kind.value:13s} ({p.location.real:+.6f}, {p.location.imag:+.6f})  R={p.value:.10g}  "
              f"|grad|={p.gradient_norm:.1e}")
    print(f"n_m = {report.n_m}  n_s = {report.n_s}  n_m - n_s = {report.delta}  1 - ell = {report.expected}  "
          f"{'✅' if report.passed else '❌'}")
    for note in report.notes:
        print(f"⚠️ {note}")

    result = {"points": [p.to_dict() for p in points], "morse": report.to_dict()}
    path = write_report(_out_path(cfg, "mityuk_critical.json"), "critical", result, cfg.to_dict())
    print(f"📄 wrote {path}")
    return EXIT_OK


def cmd_boundcheck(cfg: RunConfig) -> int:
    """R >= d(alpha, boundary) at every interior field point."""
    spec = cfg.domain_spec()
    slits = cfg.slits(spec)
    domain = spec.build()
    report = lower_bound_check(_field_for(cfg, spec, domain, slits), domain)

    _print_header(f"📏 lower bound {spec.name}  slits = {_slit_label(slits)}")
    print(f"points checked : {report.checked}")
    print(f"min R - d      : {report.min_margin:.6e}")
    print(f"violations     : {len(report.violations)}  {'✅' if report.passed else '❌'}")
    print(f"unresolved     : {report.excluded} points skipped (too close to the boundary for the node count)")

    path = write_report(_out_path(cfg, "mityuk_bounds.json"), "boundcheck", report.to_dict(), cfg.to_dict())
    print(f"📄 wrote {path}")
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    """R and m along a segment, written as CSV."""
    cfg.require("line")
    spec = cfg.domain_spec()
    slits = cfg.slits(spec)
    parts = cfg.line.split(":")  # type: ignore[union-attr]
    if len(parts) not in (2, 3):
        raise ConfigError(f"line must be SRE,SIM:ERE,EIM[:POINTS], got {cfg.line!r}")
    points = int(parts[2]) if len(parts) == 3 else 201
    frame = line_scan(spec.build(), slits, parse_complex(parts[0]), parse_complex(parts[1]), points,
                      cfg.mityuk_config())

    _print_header(f"📈 line scan {spec.name}  slits = {_slit_label(slits)}")
    print(frame["status"].value_counts().to_string())
    path = write_table(_out_path(cfg, "mityuk_scan.csv"), frame)
    print(f"📄 wrote {path}")
    return EXIT_OK


def run_demo(spec: DomainSpec, cfg: RunConfig, mixes: Sequence[Optional[str]]) -> Dict[str, Any]:
    """Sweep, critical points, Morse check, lower bound and probes for each slit mix."""
    out_dir = Path(cfg.out or "reports")
    domain = spec.build()
    mcfg = cfg.mityuk_config()
    grid = GridSpec.parse(cfg.grid or f"{spec.grid.get('nx', 101)},{spec.grid.get('ny', 101)}", spec.bbox)
    results: Dict[str, Any] = {}

    for mix in mixes:
        label = mix or "default"
        slits = spec.slit_spec(mix)
        logger.info("📊 demo %s mix=%s slits=%s", spec.name, label, slits.labels)
        field_ = sweep(domain, slits, grid, mcfg, SweepConfig(workers=cfg.workers),
                       {"domain": spec.name, "mix": label})
        field_.to_csv(out_dir / f"{spec.name}-{label}-field.csv")

        evaluator = make_evaluator(domain, slits, mcfg) if cfg.refine == REFINE_LOCAL else None
        points = find_critical_points(field_, cfg.refine, evaluator)
        morse = morse_check(points, spec.ell)
        bounds = lower_bound_check(field_, domain)
        expected = check_expected(spec, label, morse.n_m, morse.n_s, morse.n_degenerate)

        entries = probe_paths(spec, mix)
        probes: Dict[str, Any] = {"probes": [], "groups": {}}
        if entries:
            probes = run_probe_group(spec, slits, demo_paths(entries), mcfg, ProbeConfig())
        for entry, r in zip(entries, probes["probes"]):
            r.expected = None if entry.get("group") else expected_trend(entry, label)
        group_expect = {e["group"]: expected_trend(e, label) for e in entries if e.get("group")}

        results[label] = {
            "slits": slits.labels,
            "field": field_.counts(),
            "critical_points": [p.to_dict() for p in points],
            "morse": morse.to_dict(),
            "expected": expected,
            "lower_bound": bounds.to_dict(),
            "probes": [r.to_dict() for r in probes["probes"]],
            "groups": {
                name: {"trend": trend.value, "expected": group_expect.get(name),
                       "ok": group_expect.get(name) in (None, trend.value)}
                for name, trend in probes["groups"].items()
            },
        }
    return results


def cmd_demo(name: str, cfg: RunConfig) -> int:
    """Run one shipped demo end to end and write its report."""
    if cfg.theta is not None:
        raise ConfigError("demo runs use the slit mixes of the demo file; use --mix instead of --theta")
    spec = load_demo(name)
    if cfg.n:
        spec = DomainSpec.from_dict({**spec.to_dict(), "n": cfg.n})
    mixes: List[Optional[str]] = [cfg.mix] if cfg.mix else (list(spec.mixes) or [None])
    results = run_demo(spec, cfg, mixes)

    _print_header(f"🧪 demo {spec.name}  ({spec.source})")
    for mix, r in results.items():
        m = r["morse"]
        flag = "✅" if r["expected"]["ok"] else "❌"
        print(f"{mix:16s} n_m={m['n_m']} n_s={m['n_s']} degenerate={m['n_degenerate']} "
              f"expected {flag}  bound violations={r['lower_bound']['violation_count']}")
        for p in r["probes"]:
            mark = "" if "ok" not in p else ("✅" if p["ok"] else "❌")
            print(f"    {p['path']['label']:28s} {p['trend']:22s} {mark}")
        for gname, g in r["groups"].items():
            print(f"    group {gname:22s} {g['trend']:22s} {'✅' if g['ok'] else '❌'}")

    path = write_report(Path(cfg.out or "reports") / f"{spec.name}.json", "demo",
                        {"domain": spec.to_dict(), "mixes": results}, cfg.to_dict())
    print(f"📄 wrote {path}")
    return EXIT_OK


def cmd_demos(_: RunConfig) -> int:
    """List the shipped demos."""
    _print_header("🧪 shipped demos")
    for name in demo_names():
        spec = load_demo(name)
        print(f"{name:18s} ell={spec.ell}  mixes={','.join(spec.mixes) or '-'}")
    return EXIT_OK


# =========================
# ARGUMENT PARSING
# =========================
COMMANDS = {
    "compute": cmd_compute,
    "sweep": cmd_sweep,
    "probe": cmd_probe,
    "critical": cmd_critical,
    "boundcheck": cmd_boundcheck,
    "scan": cmd_scan,
    "demos": cmd_demos,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config or an earlier report; flags take precedence")
    common.add_argument("--domain", help="domain file or shipped demo name")
    common.add_argument("--theta", help="slit vector, e.g. 'c,r' or 'pi/2,0'")
    common.add_argument("--mix", help="named slit mix from the domain file")
    common.add_argument("--alpha", help="evaluation point RE,IM (negative values allowed, e.g. --alpha -0.5,0)")
    common.add_argument("--grid", help="NX,NY or NX,NY,XMIN,XMAX,YMIN,YMAX")
    common.add_argument("--path", dest="paths", action="append", help="probe path SRE,SIM:TRE,TIM[:POINTS[:FRAC]]")
    common.add_argument("--line", help="line scan SRE,SIM:ERE,EIM[:POINTS]")
    common.add_argument("--field", dest="field_file", help="saved field CSV to analyse instead of sweeping")
    common.add_argument("--n", type=int, help="nodes per boundary component")
    common.add_argument("--method", choices=["direct", "dense_direct", "iterative"])
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", dest="max_iter", type=int)
    common.add_argument("--refine", choices=[REFINE_NONE, REFINE_LOCAL])
    common.add_argument("--workers", type=int)
    common.add_argument("--boundary-values", dest="boundary_values", action="store_true", default=None)
    common.add_argument("--out", help="output file (directory for demo)")
    common.add_argument("--format", choices=["csv", "json"])
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="mityuk", description="Mityuk's radius and function of planar domains")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).strip().splitlines()[0])
    demo = sub.add_parser("demo", parents=[common], help=(cmd_demo.__doc__ or "demo").strip())
    demo.add_argument("name", help="demo name (see 'demos')")
    return parser


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    """Merge --config file values under the explicit flags."""
    data: Dict[str, Any] = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read run config {args.config}", {"reason": str(e)}) from e
        data = dict(data.get("config", data))
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            data[f.name] = value
    return RunConfig.from_dict(data)


def configure_logging(verbose: bool, quiet: bool) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(attach_negative_values(sys.argv[1:] if argv is None else list(argv)))
    configure_logging(args.verbose, args.quiet)
    try:
        cfg = run_config_from_args(args)
        if args.command == "demo":
            return cmd_demo(args.name, cfg)
        return COMMANDS[args.command](cfg)
    except MityukError as e:
        print(error_record(e), file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:  # noqa: BLE001
        logger.exception("❌ unexpected failure")
        print(error_record(e, "internal"), file=sys.stderr)
        return EXIT_INTERNAL
