#!/usr/bin/env python3
"""
Critical points of Mityuk's radius.

Candidates come from the sampled field: cells where both components of the
central-difference gradient change sign, plus strict 3 x 3 extrema. With
local refinement each candidate is polished by Newton steps on a
finite-difference gradient of the exact evaluator, then classified by the
eigenvalues of the finite-difference Hessian.
"""

import logging
from dataclasses import asdict, dataclass, fields
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from analysis.sweep import ScalarField
from core.errors import ConfigError, MityukError

logger = logging.getLogger(__name__)

Evaluator = Callable[[complex], float]

REFINE_NONE = "none"
REFINE_LOCAL = "local"


class CriticalKind(str, Enum):
    MAXIMUM = "maximum"
    SADDLE = "saddle"
    MINIMUM = "minimum"
    DEGENERATE = "non-isolated"


@dataclass(frozen=True)
class CriticalConfig:
    """
    Attributes:
        grad_tol: a point is critical when |grad R| <= grad_tol * field scale
        degenerate_tol: |lambda_min| <= degenerate_tol * field scale marks a degenerate point
        degenerate_ratio: |lambda_min| <= degenerate_ratio * |lambda_max| also marks it
        max_iter: Newton iterations per candidate
        step_fraction: first finite-difference step as a fraction of the grid spacing
        min_step_fraction: smallest finite-difference step, same units
        merge_fraction: candidates closer than this many grid spacings are merged
    """

    grad_tol: float = 1e-6
    degenerate_tol: float = 1e-8
    degenerate_ratio: float = 1e-2
    max_iter: int = 20
    step_fraction: float = 0.25
    min_step_fraction: float = 1e-2
    merge_fraction: float = 1.0

    def __post_init__(self) -> None:
        for name in ("grad_tol", "degenerate_tol", "step_fraction", "min_step_fraction", "merge_fraction"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 <= self.degenerate_ratio < 1:
            raise ConfigError(f"degenerate_ratio must lie in [0, 1), got {self.degenerate_ratio}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")

    @classmethod
    def from_dict(cls, config: Optional[Dict[str, Any]] = None) -> "CriticalConfig":
        config = dict(config or {})
        unknown = set(config) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError("unknown critical-point settings", {"keys": sorted(unknown)})
        return cls(**config)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class CriticalPoint:
    location: complex
    kind: CriticalKind
    hessian_eigs: Tuple[float, float]
    gradient_norm: float
    value: float
    refined: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x": self.location.real,
            "y": self.location.imag,
            "kind": self.kind.value,
            "hessian_eigs": list(self.hessian_eigs),
            "gradient_norm": self.gradient_norm,
            "value": self.value,
            "refined": self.refined,
        }


@dataclass(frozen=True)
class MorseReport:
    n_m: int
    n_s: int
    n_min: int
    n_degenerate: int
    ell: int
    notes: Tuple[str, ...] = ()

    @property
    def delta(self) -> int:
        return self.n_m - self.n_s

    @property
    def expected(self) -> int:
        return 1 - self.ell

    @property
    def isolated(self) -> bool:
        return self.n_degenerate == 0

    @property
    def passed(self) -> bool:
        return self.isolated and self.delta == self.expected

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_m": self.n_m,
            "n_s": self.n_s,
            "n_min": self.n_min,
            "n_degenerate": self.n_degenerate,
            "n_m_minus_n_s": self.delta,
            "one_minus_ell": self.expected,
            "isolated": self.isolated,
            "passed": self.passed,
            "notes": list(self.notes),
        }


# =========================
# CLASSIFICATION
# =========================
def classify_hessian(eigs: Sequence[float], scale: float, cfg: CriticalConfig) -> CriticalKind:
    lo, hi = sorted(eigs, key=abs)
    if abs(lo) <= max(cfg.degenerate_tol * scale, cfg.degenerate_ratio * abs(hi)):
        return CriticalKind.DEGENERATE
    if lo < 0 and hi < 0:
        return CriticalKind.MAXIMUM
    if lo > 0 and hi > 0:
        return CriticalKind.MINIMUM
    return CriticalKind.SADDLE


def _grid_derivatives(field: ScalarField) -> Dict[str, np.ndarray]:
    """Central differences; NaN wherever a stencil point is not interior."""
    V = np.where(field.interior, field.values, np.nan)
    dx, dy = field.spacing
    P = np.pad(V, 1, constant_values=np.nan)
    c = P[1:-1, 1:-1]
    e, w = P[1:-1, 2:], P[1:-1, :-2]
    n, s = P[2:, 1:-1], P[:-2, 1:-1]
    ne, nw, se, sw = P[2:, 2:], P[2:, :-2], P[:-2, 2:], P[:-2, :-2]
    return {
        "gx": (e - w) / (2 * dx),
        "gy": (n - s) / (2 * dy),
        "hxx": (e - 2 * c + w) / dx ** 2,
        "hyy": (n - 2 * c + s) / dy ** 2,
        "hxy": (ne - nw - se + sw) / (4 * dx * dy),
        "neighbours": np.stack([e, w, n, s, ne, nw, se, sw]),
    }


def _changes_sign(a: np.ndarray) -> np.ndarray:
    return (np.nanmin(a, axis=0) <= 0) & (np.nanmax(a, axis=0) >= 0) & np.all(np.isfinite(a), axis=0)


def _grid_candidates(field: ScalarField, d: Dict[str, np.ndarray]) -> List[Tuple[int, int]]:
    gx, gy = d["gx"], d["gy"]
    corners_x = np.stack([gx[:-1, :-1], gx[:-1, 1:], gx[1:, :-1], gx[1:, 1:]])
    corners_y = np.stack([gy[:-1, :-1], gy[:-1, 1:], gy[1:, :-1], gy[1:, 1:]])
    cells = _changes_sign(corners_x) & _changes_sign(corners_y)

    out = set()
    grad = np.hypot(gx, gy)
    for j, i in zip(*np.nonzero(cells)):
        block = grad[j:j + 2, i:i + 2]
        dj, di = np.unravel_index(int(np.nanargmin(block)), block.shape)
        out.add((int(j + dj), int(i + di)))

    V = np.where(field.interior, field.values, np.nan)
    nb = d["neighbours"]
    with np.errstate(invalid="ignore"):
        full = np.all(np.isfinite(nb), axis=0) & np.isfinite(V)
        is_max = full & np.all(V[None] > nb, axis=0)
        is_min = full & np.all(V[None] < nb, axis=0)
    for j, i in zip(*np.nonzero(is_max | is_min)):
        out.add((int(j), int(i)))
    return sorted(out)


def _newton_step(g: np.ndarray, H: np.ndarray, limit: float) -> np.ndarray:
    try:
        step = -np.linalg.solve(H, g)
    except np.linalg.LinAlgError:
        step = -g
    norm = float(np.hypot(*step))
    return step * (limit / norm) if norm > limit else step


def _stencil(evaluator: Evaluator, z: complex, h: float) -> Tuple[float, np.ndarray, np.ndarray]:
    f = {(a, b): evaluator(z + h * (a + 1j * b)) for a in (-1, 0, 1) for b in (-1, 0, 1)}
    g = np.array([(f[1, 0] - f[-1, 0]) / (2 * h), (f[0, 1] - f[0, -1]) / (2 * h)])
    hxx = (f[1, 0] - 2 * f[0, 0] + f[-1, 0]) / h ** 2
    hyy = (f[0, 1] - 2 * f[0, 0] + f[0, -1]) / h ** 2
    hxy = (f[1, 1] - f[-1, 1] - f[1, -1] + f[-1, -1]) / (4 * h * h)
    return f[0, 0], g, np.array([[hxx, hxy], [hxy, hyy]])


def refine_point(evaluator: Evaluator, z0: complex, spacing: float, scale: float,
                 cfg: CriticalConfig) -> Tuple[complex, float, np.ndarray, np.ndarray]:
    """
    Newton iteration on the finite-difference gradient.

    The gradient norm decreases at every accepted step; when a step fails to
    decrease it, the best point so far is returned.

    Returns:
        (location, value, gradient, hessian) at the best point
    """
    h = cfg.step_fraction * spacing
    h_min = cfg.min_step_fraction * spacing
    value, g, H = _stencil(evaluator, z0, h)
    best = (z0, value, g, H)
    for _ in range(cfg.max_iter):
        if np.hypot(*best[2]) <= cfg.grad_tol * scale:
            break
        step = _newton_step(best[2], best[3], spacing)
        z = best[0] + complex(step[0], step[1])
        h = max(h_min, 0.5 * h)
        value, g, H = _stencil(evaluator, z, h)
        if np.hypot(*g) >= np.hypot(*best[2]):
            logger.debug("🔍 refinement stalled at %s |grad|=%.3e", best[0], np.hypot(*best[2]))
            break
        best = (z, value, g, H)
    return best


def _merge(points: List[CriticalPoint], radius: float) -> List[CriticalPoint]:
    kept: List[CriticalPoint] = []
    for p in sorted(points, key=lambda q: q.gradient_norm):
        if all(abs(p.location - q.location) > radius for q in kept):
            kept.append(p)
    return kept


def find_critical_points(
    field: ScalarField,
    refine: str = REFINE_NONE,
    evaluator: Optional[Evaluator] = None,
    cfg: Optional[CriticalConfig] = None,
) -> List[CriticalPoint]:
    """
    Locate and classify critical points of a sampled field.

    Args:
        field: sampled R
        refine: 'none' (grid estimates) or 'local' (polish with evaluator)
        evaluator: alpha -> R, required for local refinement
        cfg: tolerances

    Returns:
        critical points sorted by kind and location; degenerate ones carry
        kind 'non-isolated'
    """
    cfg = cfg or CriticalConfig()
    if refine not in (REFINE_NONE, REFINE_LOCAL):
        raise ConfigError(f"refine must be '{REFINE_NONE}' or '{REFINE_LOCAL}', got {refine!r}")
    if refine == REFINE_LOCAL and evaluator is None:
        raise ConfigError("local refinement needs an evaluator")

    scale = field.scale
    dx, dy = field.spacing
    spacing = float(min(dx, dy))
    d = _grid_derivatives(field)
    grid = field.grid
    candidates = _grid_candidates(field, d)
    logger.info("🔍 %d grid candidates", len(candidates))

    found: List[CriticalPoint] = []
    for j, i in candidates:
        g = np.array([d["gx"][j, i], d["gy"][j, i]])
        H = np.array([[d["hxx"][j, i], d["hxy"][j, i]], [d["hxy"][j, i], d["hyy"][j, i]]])
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(H))):
            logger.warning("⚠️ candidate at %s too close to the mask boundary, dropped", grid[j, i])
            continue
        z = complex(grid[j, i])
        value = float(field.values[j, i])
        kind = classify_hessian(np.linalg.eigvalsh(H), scale, cfg)
        refined = False

        if refine == REFINE_LOCAL and kind is not CriticalKind.DEGENERATE:
            try:
                z, value, g, H = refine_point(evaluator, z, spacing, scale, cfg)  # type: ignore[arg-type]
                refined = True
            except MityukError as e:
                logger.warning("⚠️ candidate at %s dropped: refinement left the domain (%s)", z, e.code)
                continue
            kind = classify_hessian(np.linalg.eigvalsh(H), scale, cfg)
        elif kind is not CriticalKind.DEGENERATE:
            step = _newton_step(g, H, spacing)
            z = z + complex(step[0], step[1])
            g = g + H @ step

        grad_norm = float(np.hypot(*g))
        if refined and grad_norm > cfg.grad_tol * scale:
            logger.debug("🔍 candidate at %s not critical (|grad|=%.3e)", z, grad_norm)
            continue
        eigs = np.linalg.eigvalsh(H)
        found.append(CriticalPoint(z, kind, (float(eigs[0]), float(eigs[1])), grad_norm, value, refined))

    points = _merge(found, cfg.merge_fraction * spacing)
    for p in points:
        if p.kind is CriticalKind.MINIMUM:
            logger.warning("⚠️ local minimum at %s", p.location)
    order = {k: i for i, k in enumerate(CriticalKind)}
    return sorted(points, key=lambda p: (order[p.kind], round(p.location.real, 9), round(p.location.imag, 9)))


def morse_check(points: Sequence[CriticalPoint], ell: int) -> MorseReport:
    """
    Count maxima and saddles and compare n_m - n_s with 1 - ell.

    A failure is reported, not raised.
    """
    counts = {k: sum(1 for p in points if p.kind is k) for k in CriticalKind}
    notes = []
    if counts[CriticalKind.DEGENERATE]:
        notes.append(f"{counts[CriticalKind.DEGENERATE]} non-isolated critical points; relation not applicable")
    if counts[CriticalKind.MAXIMUM] == 0:
        notes.append("no local maximum found (n_m = 0)")
    if counts[CriticalKind.MINIMUM]:
        notes.append(f"{counts[CriticalKind.MINIMUM]} local minima found")
    report = MorseReport(
        n_m=counts[CriticalKind.MAXIMUM],
        n_s=counts[CriticalKind.SADDLE],
        n_min=counts[CriticalKind.MINIMUM],
        n_degenerate=counts[CriticalKind.DEGENERATE],
        ell=ell,
        notes=tuple(notes),
    )
    logger.info("📊 n_m=%d n_s=%d n_m-n_s=%d 1-ell=%d passed=%s",
                report.n_m, report.n_s, report.delta, report.expected, report.passed)
    return report
