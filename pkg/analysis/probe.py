#!/usr/bin/env python3
"""
Boundary-limit probes and line scans.

A probe walks alpha geometrically toward a boundary point, raising the node
count as the distance shrinks, and classifies the trend of R from a fit of
log R against log distance.
"""

import logging
from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from core.domains import DomainSpec
from core.errors import ConfigError, MityukError
from core.geometry import Domain, SlitDomain, classify_points, open_up_psi2
from core.mityuk import MityukConfig, SlitSpec, evaluate

logger = logging.getLogger(__name__)


class Trend(str, Enum):
    TO_ZERO = "to_zero"
    TO_INFINITY = "to_infinity"
    FINITE = "finite"
    DIVERGENT = "divergent-directional"


@dataclass(frozen=True)
class ProbeConfig:
    """
    Attributes:
        slope_threshold: |slope| of log R vs log d needed for a 0 or infinity trend
        zero_ratio: to_zero needs last R < zero_ratio * reference
        infinity_ratio: to_infinity needs last R > infinity_ratio * reference
        directional_tol: relative disagreement that makes two approaches divergent
        reference: reference value of R (None: R at the first path point)
        n_max: largest node count the probe escalates to
        spacings_per_distance: node spacing near the target must not exceed
            distance / spacings_per_distance
        escalate: raise n along the path
    """

    slope_threshold: float = 0.5
    zero_ratio: float = 1e-2
    infinity_ratio: float = 1e2
    directional_tol: float = 0.1
    reference: Optional[float] = None
    n_max: int = 4096
    spacings_per_distance: float = 1.0
    escalate: bool = True

    def __post_init__(self) -> None:
        if not self.slope_threshold > 0:
            raise ConfigError("slope_threshold must be positive")
        if not (0 < self.zero_ratio < 1 < self.infinity_ratio):
            raise ConfigError("need 0 < zero_ratio < 1 < infinity_ratio",
                              {"zero_ratio": self.zero_ratio, "infinity_ratio": self.infinity_ratio})
        if self.n_max < 8 or self.n_max % 2:
            raise ConfigError(f"n_max must be an even integer >= 8, got {self.n_max}")

    @classmethod
    def from_dict(cls, config: Optional[Dict[str, Any]] = None) -> "ProbeConfig":
        config = dict(config or {})
        unknown = set(config) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError("unknown probe settings", {"keys": sorted(unknown)})
        return cls(**config)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class ProbePath:
    """
    Points start -> target with geometrically shrinking distance to target.

    The last point sits at min_fraction * |start - target| from the target.
    """

    start: complex
    target: complex
    points: int = 10
    min_fraction: float = 1e-3
    label: str = ""
    group: Optional[str] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", complex(self.start))
        object.__setattr__(self, "target", complex(self.target))
        if self.start == self.target:
            raise ConfigError("probe path start and target coincide")
        if self.points < 2:
            raise ConfigError(f"probe path needs at least 2 points, got {self.points}")
        if not 0 < self.min_fraction < 1:
            raise ConfigError(f"min_fraction must lie in (0, 1), got {self.min_fraction}")

    @classmethod
    def parse(cls, text: str) -> "ProbePath":
        """'SRE,SIM:TRE,TIM[:POINTS[:MIN_FRACTION]]'."""
        parts = text.split(":")
        try:
            sx, sy = (float(v) for v in parts[0].split(","))
            tx, ty = (float(v) for v in parts[1].split(","))
            points = int(parts[2]) if len(parts) > 2 else 10
            frac = float(parts[3]) if len(parts) > 3 else 1e-3
        except (ValueError, IndexError) as e:
            raise ConfigError(f"probe path must be SRE,SIM:TRE,TIM[:POINTS[:MIN_FRACTION]], got {text!r}") from e
        return cls(complex(sx, sy), complex(tx, ty), points, frac, label=text)

    @classmethod
    def from_dict(cls, entry: Dict[str, Any]) -> "ProbePath":
        return cls(
            start=complex(*entry["start"]),
            target=complex(*entry["target"]),
            points=int(entry.get("points", 10)),
            min_fraction=float(entry.get("min_fraction", 1e-3)),
            label=str(entry.get("label", "")),
            group=entry.get("group"),
        )

    @property
    def length(self) -> float:
        return abs(self.start - self.target)

    def distances(self) -> np.ndarray:
        return self.length * self.min_fraction ** (np.arange(self.points) / (self.points - 1))

    def alphas(self) -> np.ndarray:
        direction = (self.start - self.target) / self.length
        return self.target + direction * self.distances()

    def to_dict(self) -> Dict[str, Any]:
        return {"start": [self.start.real, self.start.imag], "target": [self.target.real, self.target.imag],
                "points": self.points, "min_fraction": self.min_fraction, "label": self.label, "group": self.group}


@dataclass(frozen=True)
class ProbeSample:
    alpha: complex
    distance: float
    R: float
    n: int
    reliable: bool


@dataclass
class ProbeResult:
    path: ProbePath
    samples: List[ProbeSample]
    trend: Trend
    slope: float
    reference: float
    truncated: bool = False
    error: Optional[str] = None
    expected: Optional[str] = None

    @property
    def last_reliable(self) -> Optional[ProbeSample]:
        good = [s for s in self.samples if s.reliable]
        return good[-1] if good else (self.samples[-1] if self.samples else None)

    @property
    def n_used(self) -> int:
        return max((s.n for s in self.samples), default=0)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "label": [self.path.label] * len(self.samples),
            "alpha_re": [s.alpha.real for s in self.samples],
            "alpha_im": [s.alpha.imag for s in self.samples],
            "distance": [s.distance for s in self.samples],
            "R": [s.R for s in self.samples],
            "n": [s.n for s in self.samples],
            "reliable": [s.reliable for s in self.samples],
        })

    def to_dict(self) -> Dict[str, Any]:
        last = self.last_reliable
        out = {
            "path": self.path.to_dict(),
            "trend": self.trend.value,
            "slope": self.slope,
            "reference": self.reference,
            "last_reliable": None if last is None else {"distance": last.distance, "R": last.R, "n": last.n},
            "n_used": self.n_used,
            "truncated": self.truncated,
            "error": self.error,
            "samples": self.to_frame().drop(columns=["label"]).to_dict(orient="records"),
        }
        if self.expected is not None:
            out["expected"] = self.expected
            out["ok"] = self.expected == self.trend.value
        return out


# =========================
# TREND CLASSIFICATION
# =========================
def classify_trend(distances: Sequence[float], values: Sequence[float],
                   cfg: Optional[ProbeConfig] = None, reference: Optional[float] = None) -> Tuple[Trend, float]:
    """
    Fit log R = slope * log d + b and classify the limit as d -> 0.

    Returns:
        (trend, slope); fewer than two samples give (finite, nan)
    """
    cfg = cfg or ProbeConfig()
    d = np.asarray(distances, dtype=float)
    v = np.asarray(values, dtype=float)
    if d.size < 2:
        return Trend.FINITE, float("nan")
    slope = float(np.polyfit(np.log(d), np.log(v), 1)[0])
    ref = cfg.reference if cfg.reference is not None else (reference if reference is not None else float(v[0]))
    last = float(v[-1])
    if slope >= cfg.slope_threshold and last < cfg.zero_ratio * ref:
        return Trend.TO_ZERO, slope
    if slope <= -cfg.slope_threshold and last > cfg.infinity_ratio * ref:
        return Trend.TO_INFINITY, slope
    return Trend.FINITE, slope


def compare_directions(results: Sequence[ProbeResult], cfg: Optional[ProbeConfig] = None) -> Trend:
    """
    Combine probes that approach the same boundary point from different directions.

    Differing trends, or finite limits that differ by more than directional_tol,
    give divergent-directional.
    """
    cfg = cfg or ProbeConfig()
    if not results:
        raise ConfigError("no probes to compare")
    trends = {r.trend for r in results}
    if len(trends) > 1:
        return Trend.DIVERGENT
    trend = trends.pop()
    if trend is Trend.FINITE:
        lasts = [r.last_reliable.R for r in results if r.last_reliable is not None]
        if len(lasts) >= 2:
            spread = (max(lasts) - min(lasts)) / max(abs(v) for v in lasts)
            if spread > cfg.directional_tol:
                return Trend.DIVERGENT
    return trend


# =========================
# PROBING
# =========================
def _on_slit(domain: SlitDomain, target: complex) -> bool:
    a, b = domain.slit_start, domain.slit_end
    lam = np.clip(np.real((target - a) * np.conj(b - a)) / abs(b - a) ** 2, 0.0, 1.0)
    return bool(abs(target - (a + lam * (b - a))) < 1e-12 * abs(b - a))


def _spacing_near(domain: Domain, target: complex) -> float:
    """
    Node spacing of the discretization next to target.

    For a target on a slit the discretization lives on the unit circle of
    the opened-up plane, so the spacing is 2*pi/n there.
    """
    if isinstance(domain, SlitDomain):
        if _on_slit(domain, target):
            return float(2.0 * np.pi / domain.n)
        nodes = domain.outer.nodes
    else:
        nodes = domain.nodes
    j = int(np.argmin(np.abs(nodes - target)))
    n = domain.n
    k, local = divmod(j, n)
    ring = nodes[k * n:(k + 1) * n]
    return float(max(abs(ring[(local + 1) % n] - ring[local]), abs(ring[local] - ring[local - 1])))


def _effective_distance(domain: Domain, target: complex, alpha: complex, distance: float) -> float:
    """Distance to the target in the plane where the boundary is discretized."""
    if isinstance(domain, SlitDomain) and _on_slit(domain, target):
        return float(abs(open_up_psi2(domain.normalize(alpha))) - 1.0)
    return distance


def _required_n(n0: int, spacing0: float, distance: float, cfg: ProbeConfig) -> Tuple[int, bool]:
    limit = distance / cfg.spacings_per_distance
    if spacing0 <= limit or not cfg.escalate:
        return n0, spacing0 <= limit
    doublings = int(np.ceil(np.log2(spacing0 / limit)))
    n = n0 * 2 ** doublings
    return (n, True) if n <= cfg.n_max else (max(n0, cfg.n_max), False)


def boundary_probe(
    problem: Union[DomainSpec, Domain],
    slits: SlitSpec,
    path: ProbePath,
    cfg: Optional[MityukConfig] = None,
    probe_cfg: Optional[ProbeConfig] = None,
    reference: Optional[float] = None,
) -> ProbeResult:
    """
    Evaluate R along a path approaching a boundary point and classify the trend.

    With a DomainSpec, n is raised along the path so the node spacing near
    the target stays below the distance; points needing more than n_max are
    still evaluated at n_max but marked unreliable. A solver failure
    truncates the path and the trend is taken from the prefix.

    Args:
        problem: domain file (escalation possible) or a fixed discretization
        slits: slit vector
        path: probe path
        cfg: evaluation settings
        probe_cfg: classification thresholds and escalation limits
        reference: reference R (for example a field median)

    Returns:
        ProbeResult
    """
    cfg = cfg or MityukConfig()
    probe_cfg = probe_cfg or ProbeConfig()
    builds: Dict[int, Domain] = {}

    def domain_at(n: int) -> Domain:
        if n not in builds:
            builds[n] = problem.build(n) if isinstance(problem, DomainSpec) else problem
        return builds[n]

    n0 = problem.n
    base = domain_at(n0)
    slits.check_arity(base.ell)
    spacing0 = _spacing_near(base, path.target)
    escalate_cfg = probe_cfg if isinstance(problem, DomainSpec) else ProbeConfig(**{**probe_cfg.to_dict(), "escalate": False})

    samples: List[ProbeSample] = []
    truncated, error = False, None
    for alpha, distance in zip(path.alphas(), path.distances()):
        effective = _effective_distance(base, path.target, complex(alpha), float(distance))
        n, reliable = _required_n(n0, spacing0, effective, escalate_cfg)
        domain = domain_at(n)
        try:
            result = evaluate(domain, complex(alpha), slits, cfg)
        except MityukError as e:
            logger.warning("⚠️ probe %s truncated at d=%.3e: %s", path.label, distance, e)
            truncated, error = True, e.code
            break
        samples.append(ProbeSample(complex(alpha), float(distance), result.R, domain.n, reliable))

    usable = [s for s in samples if s.reliable] or samples
    trend, slope = classify_trend([s.distance for s in usable], [s.R for s in usable], probe_cfg,
                                  reference if reference is not None else (samples[0].R if samples else None))
    ref = probe_cfg.reference or reference or (samples[0].R if samples else float("nan"))
    logger.info("🔍 probe %s: trend=%s slope=%.3f n_used=%d", path.label or path.target, trend.value, slope,
                max((s.n for s in samples), default=0))
    return ProbeResult(path, samples, trend, slope, float(ref), truncated, error)


def run_probe_group(
    problem: Union[DomainSpec, Domain],
    slits: SlitSpec,
    paths: Sequence[ProbePath],
    cfg: Optional[MityukConfig] = None,
    probe_cfg: Optional[ProbeConfig] = None,
) -> Dict[str, Any]:
    """Run several probes; probes sharing a group are compared with compare_directions."""
    results = [boundary_probe(problem, slits, p, cfg, probe_cfg) for p in paths]
    groups: Dict[str, List[ProbeResult]] = {}
    for r in results:
        if r.path.group:
            groups.setdefault(r.path.group, []).append(r)
    return {
        "probes": results,
        "groups": {name: compare_directions(members, probe_cfg) for name, members in groups.items()},
    }


def line_scan(
    domain: Domain,
    slits: SlitSpec,
    start: complex,
    end: complex,
    points: int = 201,
    cfg: Optional[MityukConfig] = None,
) -> pd.DataFrame:
    """
    R and m along the segment start -> end; points outside the domain are kept with status.

    Returns:
        DataFrame with columns t, x, y, status, R, m
    """
    if points < 2:
        raise ConfigError(f"line scan needs at least 2 points, got {points}")
    cfg = cfg or MityukConfig()
    t = np.linspace(0.0, 1.0, points)
    z = complex(start) + t * (complex(end) - complex(start))
    classes = classify_points(domain, z)
    rows = []
    for ti, zi, cls in zip(t, z, classes):
        row = {"t": ti, "x": zi.real, "y": zi.imag, "status": cls.value, "R": np.nan, "m": np.nan}
        if row["status"] == "interior":
            try:
                result = evaluate(domain, complex(zi), slits, cfg)
                row["R"], row["m"] = result.R, result.m
            except MityukError as e:
                row["status"] = e.code
        rows.append(row)
    return pd.DataFrame(rows, columns=["t", "x", "y", "status", "R", "m"])


def expected_trend(entry: Dict[str, Any], mix: str) -> Optional[str]:
    return entry.get("expect", {}).get(mix)


def demo_paths(entries: Sequence[Dict[str, Any]]) -> List[ProbePath]:
    return [ProbePath.from_dict(e) for e in entries]
