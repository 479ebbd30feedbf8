#!/usr/bin/env python3
"""
Grid sweeps of Mityuk's radius over alpha.

One independent solve per interior grid point. Points are distributed over
a process pool; results are written back by grid index, so the field does
not depend on the schedule or on the worker count.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from core.errors import (
    BoundaryIndeterminateError,
    ConfigError,
    MityukError,
    PointNotInteriorError,
)
from core.geometry import Domain, PointClass, classify_points, resolution_ratios
from core.mityuk import MityukConfig, SlitSpec, evaluate

logger = logging.getLogger(__name__)

INTERIOR = PointClass.INTERIOR.value
EXTERIOR = PointClass.EXTERIOR.value
GUARD = PointClass.BOUNDARY.value
FAILED = "failed"
MASK_VALUES = (INTERIOR, EXTERIOR, GUARD, FAILED)
UNRELIABLE = "unreliable"

WORKERS_ENV = "MITYUK_WORKERS"


# =========================
# CONFIGURATION
# =========================
@dataclass(frozen=True)
class GridSpec:
    """nx x ny lattice over the box [xmin, xmax] x [ymin, ymax]."""

    nx: int = 101
    ny: int = 101
    bbox: Tuple[float, float, float, float] = (-1.0, 1.0, -1.0, 1.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "bbox", tuple(float(v) for v in self.bbox))
        if self.nx < 3 or self.ny < 3:
            raise ConfigError(f"grid needs at least 3 x 3 points, got {self.nx} x {self.ny}")
        xmin, xmax, ymin, ymax = self.bbox
        if not (xmin < xmax and ymin < ymax):
            raise ConfigError("grid bbox must satisfy xmin < xmax and ymin < ymax", {"bbox": list(self.bbox)})

    @classmethod
    def parse(cls, text: str, default_bbox: Optional[Tuple[float, float, float, float]] = None) -> "GridSpec":
        """'NX,NY' (box from the domain) or 'NX,NY,XMIN,XMAX,YMIN,YMAX'."""
        parts = [p for p in text.replace(" ", "").split(",") if p]
        try:
            if len(parts) == 2:
                if default_bbox is None:
                    raise ConfigError("grid without bbox needs a domain bbox")
                return cls(int(parts[0]), int(parts[1]), default_bbox)
            if len(parts) == 6:
                return cls(int(parts[0]), int(parts[1]), tuple(float(p) for p in parts[2:]))  # type: ignore[arg-type]
        except ValueError as e:
            raise ConfigError(f"cannot read grid spec {text!r}") from e
        raise ConfigError(f"grid spec must be NX,NY or NX,NY,XMIN,XMAX,YMIN,YMAX, got {text!r}")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.bbox[0], self.bbox[1], self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.bbox[2], self.bbox[3], self.ny)

    def points(self) -> np.ndarray:
        """Complex lattice of shape (ny, nx); row j has y = ys[j]."""
        X, Y = np.meshgrid(self.xs, self.ys)
        return X + 1j * Y

    def to_dict(self) -> Dict[str, Any]:
        return {"nx": self.nx, "ny": self.ny, "bbox": list(self.bbox)}


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError as e:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from e
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SweepConfig:
    """
    Attributes:
        workers: process count (None: MITYUK_WORKERS or the core count)
        chunksize: points per task (None: spread over 8 chunks per worker)
        min_resolution: interior points closer to the boundary than this many
            local node spacings are flagged unreliable (0 disables the flag)
    """

    workers: Optional[int] = None
    chunksize: Optional[int] = None
    min_resolution: float = 2.0

    def __post_init__(self) -> None:
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.chunksize is not None and self.chunksize < 1:
            raise ConfigError(f"chunksize must be >= 1, got {self.chunksize}")
        if self.min_resolution < 0:
            raise ConfigError(f"min_resolution must be >= 0, got {self.min_resolution}")

    @classmethod
    def from_dict(cls, config: Optional[Dict[str, Any]] = None) -> "SweepConfig":
        config = dict(config or {})
        unknown = set(config) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError("unknown sweep settings", {"keys": sorted(unknown)})
        return cls(**config)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @property
    def resolved_workers(self) -> int:
        return self.workers or default_workers()


# =========================
# FIELD
# =========================
@dataclass
class ScalarField:
    """
    Values of R on a rectangular lattice.

    values is NaN wherever mask is not 'interior'. reliable is False at
    interior points closer to the boundary than the discretization resolves;
    their values are kept but analyses may skip them.
    """

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    mask: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)
    reliable: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.xs = np.asarray(self.xs, dtype=float)
        self.ys = np.asarray(self.ys, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.mask = np.asarray(self.mask, dtype=object)
        shape = (self.ys.size, self.xs.size)
        reliable = self.mask == INTERIOR if self.reliable is None else np.asarray(self.reliable, dtype=bool)
        if self.values.shape != shape or self.mask.shape != shape or reliable.shape != shape:
            raise ConfigError("field arrays do not match the grid",
                              {"grid": list(shape), "values": list(self.values.shape)})
        self.reliable = reliable & self.interior
        bad = self.interior & ~(np.isfinite(self.values) & (self.values > 0))
        if np.any(bad):
            raise ConfigError("interior field values must be finite and positive",
                              {"count": int(np.count_nonzero(bad))})

    @property
    def interior(self) -> np.ndarray:
        return self.mask == INTERIOR

    @property
    def grid(self) -> np.ndarray:
        X, Y = np.meshgrid(self.xs, self.ys)
        return X + 1j * Y

    @property
    def spacing(self) -> Tuple[float, float]:
        return float(self.xs[1] - self.xs[0]), float(self.ys[1] - self.ys[0])

    @property
    def scale(self) -> float:
        """max - min over interior points."""
        vals = self.values[self.interior]
        return float(vals.max() - vals.min()) if vals.size else 0.0

    def counts(self) -> Dict[str, int]:
        out = {m: int(np.count_nonzero(self.mask == m)) for m in MASK_VALUES}
        out[UNRELIABLE] = int(np.count_nonzero(self.interior & ~self.reliable))
        return out

    def to_frame(self) -> pd.DataFrame:
        X, Y = np.meshgrid(self.xs, self.ys)
        return pd.DataFrame({
            "x": X.ravel(),
            "y": Y.ravel(),
            "mask": self.mask.ravel().astype(str),
            "R": self.values.ravel(),
            "reliable": self.reliable.ravel(),
        })

    def to_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g", na_rep="")
        return path

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, meta: Optional[Dict[str, Any]] = None) -> "ScalarField":
        missing = {"x", "y", "mask", "R"} - set(frame.columns)
        if missing:
            raise ConfigError("field table lacks columns", {"missing": sorted(missing)})
        xs = np.unique(frame["x"].to_numpy(dtype=float))
        ys = np.unique(frame["y"].to_numpy(dtype=float))
        ix = np.searchsorted(xs, frame["x"].to_numpy(dtype=float))
        iy = np.searchsorted(ys, frame["y"].to_numpy(dtype=float))
        values = np.full((ys.size, xs.size), np.nan)
        mask = np.full((ys.size, xs.size), EXTERIOR, dtype=object)
        values[iy, ix] = frame["R"].to_numpy(dtype=float)
        mask[iy, ix] = frame["mask"].astype(str).to_numpy()
        reliable = None
        if "reliable" in frame.columns:
            reliable = np.zeros((ys.size, xs.size), dtype=bool)
            reliable[iy, ix] = frame["reliable"].astype(bool).to_numpy()
        return cls(xs, ys, values, mask, dict(meta or {}), reliable)

    @classmethod
    def from_csv(cls, path: Union[str, Path], meta: Optional[Dict[str, Any]] = None) -> "ScalarField":
        """Load a field written by to_csv, for re-analysis without recomputation."""
        return cls.from_frame(pd.read_csv(path), meta)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "meta": self.meta,
            "xs": self.xs.tolist(),
            "ys": self.ys.tolist(),
            "mask": self.mask.tolist(),
            "reliable": self.reliable.tolist(),
            "R": [[None if np.isnan(v) else float(v) for v in row] for row in self.values],
            "counts": self.counts(),
        }


# =========================
# SWEEP
# =========================
_DOMAIN: Optional[Domain] = None
_SLITS: Optional[SlitSpec] = None
_CFG: Optional[MityukConfig] = None


def _init_worker(domain: Domain, slits: SlitSpec, cfg: MityukConfig) -> None:
    """Initializer for pool workers: one copy of the problem per process."""
    global _DOMAIN, _SLITS, _CFG
    _DOMAIN, _SLITS, _CFG = domain, slits, cfg


def _point_task(alpha: complex) -> Tuple[float, str]:
    try:
        return evaluate(_DOMAIN, alpha, _SLITS, _CFG).R, INTERIOR
    except BoundaryIndeterminateError:
        return float("nan"), GUARD
    except PointNotInteriorError:
        return float("nan"), EXTERIOR
    except MityukError as e:
        logger.warning("⚠️ solve failed at alpha=%s: %s", alpha, e)
        return float("nan"), FAILED


def _run_points(points: List[complex], workers: int, chunksize: Optional[int],
                progress: Callable[[int], None]) -> List[Tuple[float, str]]:
    if workers == 1 or len(points) <= 1:
        out = []
        for i, alpha in enumerate(points, 1):
            out.append(_point_task(alpha))
            progress(i)
        return out

    chunksize = chunksize or max(1, len(points) // (8 * workers))
    out = []
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                             initargs=(_DOMAIN, _SLITS, _CFG)) as pool:
        for i, result in enumerate(pool.map(_point_task, points, chunksize=chunksize), 1):
            out.append(result)
            progress(i)
    return out


def sweep(
    domain: Domain,
    slits: SlitSpec,
    grid: GridSpec,
    cfg: Optional[MityukConfig] = None,
    sweep_cfg: Optional[SweepConfig] = None,
    meta: Optional[Dict[str, Any]] = None,
) -> ScalarField:
    """
    Evaluate R at every interior lattice point.

    Per-point failures are recorded in the mask and never abort the sweep.

    Args:
        domain: discretized domain (or slit domain)
        slits: slit vector
        grid: lattice
        cfg: evaluation settings
        sweep_cfg: parallelism
        meta: extra metadata stored with the field

    Returns:
        ScalarField
    """
    cfg = cfg or MityukConfig()
    sweep_cfg = sweep_cfg or SweepConfig()
    slits.check_arity(domain.ell)

    lattice = grid.points()
    classes = classify_points(domain, lattice.ravel())
    mask = np.array([c.value for c in classes], dtype=object)
    values = np.full(lattice.size, np.nan)
    todo = np.flatnonzero(mask == INTERIOR)
    workers = sweep_cfg.resolved_workers

    logger.info("📊 sweep %d x %d: %d interior points, %d workers", grid.nx, grid.ny, todo.size, workers)
    step = max(1, todo.size // 10)

    def progress(done: int) -> None:
        if done % step == 0 or done == todo.size:
            logger.info("📊 sweep progress %d/%d", done, todo.size)

    _init_worker(domain, slits, cfg)
    results = _run_points([complex(z) for z in lattice.ravel()[todo]], workers, sweep_cfg.chunksize, progress)
    for idx, (value, status) in zip(todo, results):
        values[idx] = value
        mask[idx] = status

    reliable = np.asarray(mask == INTERIOR, dtype=bool)
    solved = np.flatnonzero(reliable)
    if solved.size and sweep_cfg.min_resolution > 0:
        ratios = resolution_ratios(domain, lattice.ravel()[solved])
        reliable[solved] = ratios >= sweep_cfg.min_resolution
        flagged = int(np.count_nonzero(~reliable[solved]))
        if flagged:
            logger.warning("⚠️ %d points lie within %.1f node spacings of the boundary; flagged unreliable",
                           flagged, sweep_cfg.min_resolution)

    info = {"slits": list(slits.thetas), "n": domain.n, "grid": grid.to_dict(), "solver": cfg.solver.to_dict(),
            "min_resolution": sweep_cfg.min_resolution}
    info.update(meta or {})
    field_ = ScalarField(grid.xs, grid.ys, values.reshape(lattice.shape), mask.reshape(lattice.shape), info,
                         reliable.reshape(lattice.shape).astype(bool))
    logger.info("✅ sweep done %s", field_.counts())
    return field_


def make_evaluator(domain: Domain, slits: SlitSpec, cfg: Optional[MityukConfig] = None) -> Callable[[complex], float]:
    """alpha -> R(G, alpha), used by local critical-point refinement."""
    cfg = cfg or MityukConfig()

    def evaluator(alpha: complex) -> float:
        return evaluate(domain, alpha, slits, cfg).R

    return evaluator
