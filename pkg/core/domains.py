#!/usr/bin/env python3
"""
Domain files and the demo registry.

A domain file is JSON: the outer boundary, the inner boundaries (or one
straight slit to be opened up), the default node count and optional study
metadata (slit mixes, expected critical-point counts, sweep box, probe
paths). DomainSpec.build(n) discretizes it at any resolution.
"""

import json
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from core.errors import ConfigError, UnknownDemoError
from core.geometry import (
    CCW,
    CornerSpec,
    Domain,
    ParamBoundary,
    SlitDomain,
    assemble_domain,
    make_circle,
    make_ellipse,
    make_fourier_curve,
    make_polygon,
)
from core.mityuk import SlitSpec

logger = logging.getLogger(__name__)

DEMO_DIR = Path(__file__).resolve().parent.parent / "demos"


def _complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"complex number must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def build_boundary(spec: Dict[str, Any], n: int) -> ParamBoundary:
    """
    Discretize one boundary entry of a domain file.

    Args:
        spec: {"type": "circle" | "polygon" | "fourier" | "ellipse", ...}
        n: node count for this component

    Returns:
        ParamBoundary (counterclockwise; assembly reorients inner curves)
    """
    kind = spec.get("type")
    try:
        if kind == "circle":
            return make_circle(_complex(spec.get("center", 0.0)), float(spec["radius"]), CCW, n)
        if kind == "polygon":
            vertices = [_complex(v) for v in spec["vertices"]]
            grading = CornerSpec.uniform(len(vertices), int(spec.get("grading", 3)))
            return make_polygon(vertices, CCW, n=n, grading=grading)
        if kind == "fourier":
            coeffs = [(int(k), complex(float(re), float(im))) for k, re, im in spec["coefficients"]]
            return make_fourier_curve(coeffs, CCW, n)
        if kind == "ellipse":
            return make_ellipse(_complex(spec.get("center", 0.0)), float(spec["a"]), float(spec["b"]),
                                float(spec.get("angle", 0.0)), CCW, n)
    except KeyError as e:
        raise ConfigError(f"boundary of type {kind!r} is missing {e.args[0]!r}", {"boundary": spec}) from e
    raise ConfigError(f"unknown boundary type {kind!r}", {"allowed": ["circle", "polygon", "fourier", "ellipse"]})


@dataclass(frozen=True)
class DomainSpec:
    """
    A domain as read from a domain file.

    mixes maps a label to a slit vector (e.g. {"circular": ["c", "c"]});
    expected maps the same labels to the critical-point counts the study
    reports ({"n_m": 2, "n_s": 3}, {"morse_delta": -5} or {"degenerate_ring": true}).
    """

    name: str
    outer: Dict[str, Any]
    inners: Tuple[Dict[str, Any], ...] = ()
    n: int = 1024
    source: str = ""
    slit: Optional[Dict[str, Any]] = None
    thetas: Optional[Tuple[float, ...]] = None
    mixes: Dict[str, List[Any]] = field(default_factory=dict)
    expected: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    grid: Dict[str, Any] = field(default_factory=dict)
    probes: Tuple[Dict[str, Any], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "inners", tuple(self.inners))
        object.__setattr__(self, "probes", tuple(self.probes))
        if self.thetas is not None:
            object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        if self.slit is not None and self.inners:
            raise ConfigError("a slit domain cannot also have inner curves", {"domain": self.name})
        for label in self.expected:
            if label not in self.mixes:
                raise ConfigError(f"expected counts for unknown mix {label!r}", {"domain": self.name})

    @property
    def is_slit(self) -> bool:
        return self.slit is not None

    @property
    def ell(self) -> int:
        return 1 if self.is_slit else len(self.inners)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DomainSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError("unknown keys in domain file", {"keys": sorted(unknown)})
        for key in ("name", "outer"):
            if key not in data:
                raise ConfigError(f"domain file lacks {key!r}")
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"name": self.name, "source": self.source, "n": self.n,
                               "outer": self.outer, "inners": list(self.inners)}
        if self.slit is not None:
            out["slit"] = self.slit
        if self.thetas is not None:
            out["thetas"] = list(self.thetas)
        for key in ("mixes", "expected", "grid"):
            if getattr(self, key):
                out[key] = getattr(self, key)
        if self.probes:
            out["probes"] = list(self.probes)
        return out

    def build(self, n: Optional[int] = None, guard_factor: float = 1e-6) -> Domain:
        """Discretize at n nodes per component (default: the file's n)."""
        n = int(n or self.n)
        outer = build_boundary(self.outer, n)
        if self.is_slit:
            try:
                start, end = _complex(self.slit["start"]), _complex(self.slit["end"])
            except KeyError as e:
                raise ConfigError("slit needs 'start' and 'end'", {"slit": self.slit}) from e
            return SlitDomain(outer, start, end, guard_factor)
        inners = [build_boundary(b, n) for b in self.inners]
        return assemble_domain(outer, inners, guard_factor)

    def slit_spec(self, mix: Optional[str] = None) -> SlitSpec:
        """Slit vector for a named mix, the file default, or all circular."""
        if mix is not None:
            if mix not in self.mixes:
                raise ConfigError(f"domain {self.name!r} has no slit mix {mix!r}", {"mixes": sorted(self.mixes)})
            slits = SlitSpec.parse(self.mixes[mix])
        elif self.thetas is not None:
            slits = SlitSpec(self.thetas)
        else:
            slits = SlitSpec.uniform(self.ell)
        slits.check_arity(self.ell)
        return slits

    @property
    def bbox(self) -> Tuple[float, float, float, float]:
        box = self.grid.get("bbox")
        if box is not None:
            if len(box) != 4:
                raise ConfigError("grid bbox must be [xmin, xmax, ymin, ymax]", {"bbox": box})
            return tuple(float(v) for v in box)  # type: ignore[return-value]
        return self.build(64).bbox


def load_domain(path: Union[str, Path]) -> DomainSpec:
    """Read a domain file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as e:
        raise ConfigError(f"domain file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"domain file is not valid JSON: {path}", {"reason": str(e)}) from e
    spec = DomainSpec.from_dict(data)
    logger.debug("📄 loaded domain %s from %s (ell=%d)", spec.name, path, spec.ell)
    return spec


def demo_names() -> List[str]:
    return sorted(p.stem for p in DEMO_DIR.glob("*.json"))


def load_demo(name: str) -> DomainSpec:
    """
    Load a shipped demo by name.

    Raises:
        UnknownDemoError: no demo file with that name
    """
    path = DEMO_DIR / f"{name}.json"
    if not path.exists():
        raise UnknownDemoError(f"unknown demo {name!r}", {"available": demo_names()})
    return load_domain(path)


def resolve_domain(ref: str) -> DomainSpec:
    """A path to a domain file, or the name of a shipped demo."""
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        return load_domain(path)
    return load_demo(ref)


def check_expected(spec: DomainSpec, mix: str, n_m: int, n_s: int, degenerate: int) -> Dict[str, Any]:
    """Compare detected counts with the counts a demo file records for a mix."""
    expected = spec.expected.get(mix, {})
    checks: Dict[str, Any] = {}
    if "n_m" in expected:
        checks["n_m"] = {"expected": expected["n_m"], "found": n_m, "ok": expected["n_m"] == n_m}
    if "n_s" in expected:
        checks["n_s"] = {"expected": expected["n_s"], "found": n_s, "ok": expected["n_s"] == n_s}
    if "morse_delta" in expected:
        delta = n_m - n_s
        checks["morse_delta"] = {"expected": expected["morse_delta"], "found": delta,
                                 "ok": expected["morse_delta"] == delta}
    if expected.get("degenerate_ring"):
        checks["degenerate_ring"] = {"expected": True, "found": degenerate > 0, "ok": degenerate > 0}
    return {"mix": mix, "checks": checks, "ok": all(c["ok"] for c in checks.values())}


def probe_paths(spec: DomainSpec, mix: Optional[str] = None) -> List[Dict[str, Any]]:
    """Probe path entries of a demo, optionally restricted to one mix."""
    paths = [dict(p) for p in spec.probes]
    for p in paths:
        for key in ("start", "target"):
            if key not in p:
                raise ConfigError(f"probe path lacks {key!r}", {"domain": spec.name, "probe": p})
    if mix is not None:
        paths = [p for p in paths if mix in p.get("expect", {mix: None})]
    return paths
