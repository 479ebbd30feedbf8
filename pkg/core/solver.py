#!/usr/bin/env python3
"""
Solver for the boundary integral equation (I - N) mu = -M gamma.

After mu is known, h = [M mu - (I - N) gamma] / 2 is piecewise constant; its
per-component means are the constants h_0, ..., h_ell.
"""

import logging
import warnings
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import LinearOperator, gmres

from core.errors import ConfigError, ConvergenceError, SolverError
from core.kernel import apply_operator

logger = logging.getLogger(__name__)

DENSE_DIRECT: str = "dense_direct"
ITERATIVE: str = "iterative"
METHOD_ALIASES: Dict[str, str] = {"direct": DENSE_DIRECT, DENSE_DIRECT: DENSE_DIRECT, ITERATIVE: ITERATIVE}


@dataclass(frozen=True)
class SolverConfig:
    """
    Linear solver settings.

    Attributes:
        method: 'dense_direct' (LU) or 'iterative' (GMRES)
        tol: GMRES relative residual tolerance
        max_iter: maximum number of GMRES iterations
        restart: GMRES restart length; None runs unrestarted
        accept_factor: an iterative solve that stops at max_iter is still
            accepted when its residual certificate is below accept_factor * tol
    """

    method: str = DENSE_DIRECT
    tol: float = 1e-14
    max_iter: int = 100
    restart: Optional[int] = None
    accept_factor: float = 10.0

    def __post_init__(self) -> None:
        if self.method not in METHOD_ALIASES:
            raise ConfigError(f"unknown solver method {self.method!r}", {"allowed": sorted(METHOD_ALIASES)})
        object.__setattr__(self, "method", METHOD_ALIASES[self.method])
        if not self.tol > 0:
            raise ConfigError(f"solver tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.restart is not None and self.restart < 1:
            raise ConfigError(f"restart must be >= 1 or None, got {self.restart}")

    @classmethod
    def from_dict(cls, config: Optional[Dict[str, Any]] = None) -> "SolverConfig":
        config = dict(config or {})
        known = {f.name for f in fields(cls)}
        unknown = set(config) - known
        if unknown:
            raise ConfigError("unknown solver settings", {"keys": sorted(unknown)})
        return cls(**config)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class DensityAndConstants:
    """
    Solution of the integral equation.

    Attributes:
        mu: density over J
        h: piecewise-constant function over J (pointwise values)
        h_means: per-component averages (h_0, ..., h_ell)
        h_residuals: per-component standard deviations of h
        residual: ||(I - N) mu + M gamma||_inf / ||M gamma||_inf
        iterations: GMRES iterations (0 for the direct solver)
        method: solver actually used
    """

    mu: np.ndarray
    h: np.ndarray
    h_means: np.ndarray
    h_residuals: np.ndarray
    residual: float
    iterations: int
    method: str

    @property
    def h0(self) -> float:
        return float(self.h_means[0])


def _dense_solve(system: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            return scipy.linalg.solve(system, rhs, overwrite_a=True, check_finite=False)
        except (scipy.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as e:
            raise SolverError(
                "dense factorization of I - N failed; the geometry or the evaluation point is invalid",
                {"reason": str(e)},
            ) from e


def _kept_nodes(exclude: Optional[np.ndarray], size: int) -> np.ndarray:
    if exclude is None:
        return np.ones(size, dtype=bool)
    keep = ~np.asarray(exclude, dtype=bool)
    if keep.shape != (size,):
        raise SolverError("exclusion mask does not match the node count", {"size": size, "mask": list(keep.shape)})
    return keep


def _gmres_solve(N: np.ndarray, rhs: np.ndarray, cfg: SolverConfig) -> Dict[str, Any]:
    size = rhs.shape[0]
    operator = LinearOperator((size, size), matvec=lambda x: x - apply_operator(N, x), dtype=float)
    restart = cfg.restart or cfg.max_iter
    counter = {"iterations": 0}

    def _count(_: float) -> None:
        counter["iterations"] += 1

    mu, info = gmres(
        operator,
        rhs,
        rtol=cfg.tol,
        atol=0.0,
        restart=restart,
        maxiter=int(np.ceil(cfg.max_iter / restart)),
        callback=_count,
        callback_type="pr_norm",
    )
    if info < 0:
        raise SolverError("GMRES reported an illegal input or breakdown", {"info": int(info)})
    return {"mu": mu, "info": int(info), "iterations": counter["iterations"]}


def solve_density(
    N: np.ndarray,
    M: np.ndarray,
    gamma: np.ndarray,
    cfg: Optional[SolverConfig] = None,
    n: Optional[int] = None,
    exclude: Optional[np.ndarray] = None,
) -> DensityAndConstants:
    """
    Solve (I - N) mu = -M gamma and form h = [M mu - (I - N) gamma] / 2.

    Args:
        N: Nystrom matrix of the generalized Neumann kernel
        M: Nystrom matrix of the companion kernel
        gamma: right-hand-side function over J
        cfg: solver configuration (default dense direct)
        n: nodes per component; default treats J as one component
        exclude: nodes left out of the means and residuals of h (graded corner
            nodes, where eta' vanishes and h is not resolved)

    Returns:
        DensityAndConstants with per-component means and constancy residuals

    Raises:
        SolverError: singular dense system or non-finite kernel entries
        ConvergenceError: GMRES stopped short of the tolerance
    """
    cfg = cfg or SolverConfig()
    gamma = np.asarray(gamma, dtype=float)
    size = gamma.shape[0]
    if N.shape != (size, size) or M.shape != (size, size):
        raise SolverError("matrix and right-hand-side sizes differ",
                          {"N": list(N.shape), "M": list(M.shape), "gamma": size})
    if not np.all(np.isfinite(gamma)):
        raise SolverError("right-hand side has non-finite entries")
    if not (np.all(np.isfinite(N)) and np.all(np.isfinite(M))):
        raise SolverError("kernel matrices have non-finite entries; boundary nodes may coincide",
                          {"N": int(np.count_nonzero(~np.isfinite(N))), "M": int(np.count_nonzero(~np.isfinite(M)))})
    n = n or size
    if size % n != 0:
        raise SolverError(f"{size} nodes cannot be split into components of {n}")

    rhs = -apply_operator(M, gamma)
    iterations = 0
    if not np.any(rhs):
        mu = np.zeros(size)
    elif cfg.method == DENSE_DIRECT:
        system = np.eye(size) - N
        mu = _dense_solve(system, rhs)
    else:
        outcome = _gmres_solve(N, rhs, cfg)
        mu, iterations = outcome["mu"], outcome["iterations"]

    residual_vec = mu - apply_operator(N, mu) - rhs
    scale = float(np.max(np.abs(rhs)))
    residual = float(np.max(np.abs(residual_vec)) / scale) if scale > 0 else float(np.max(np.abs(residual_vec)))

    if cfg.method == ITERATIVE and residual > cfg.accept_factor * cfg.tol and iterations >= cfg.max_iter:
        raise ConvergenceError(
            f"GMRES did not converge in {cfg.max_iter} iterations",
            {"residual": residual, "iterations": iterations, "tol": cfg.tol},
        )
    if cfg.method == ITERATIVE and residual > cfg.accept_factor * cfg.tol:
        logger.warning("⚠️ GMRES residual %.2e above %.0e x tol", residual, cfg.accept_factor)

    h = 0.5 * (apply_operator(M, mu) - (gamma - apply_operator(N, gamma)))
    per_component = h.reshape(-1, n)
    keep = _kept_nodes(exclude, size).reshape(-1, n)
    counts = keep.sum(axis=1)
    h_means = np.where(keep, per_component, 0.0).sum(axis=1) / counts
    h_residuals = np.sqrt(np.where(keep, (per_component - h_means[:, None]) ** 2, 0.0).sum(axis=1) / counts)

    logger.debug("✅ density solved method=%s size=%d h0=%.15g residual=%.2e iterations=%d",
                 cfg.method, size, h_means[0], residual, iterations)

    return DensityAndConstants(
        mu=mu,
        h=h,
        h_means=h_means,
        h_residuals=h_residuals,
        residual=residual,
        iterations=iterations,
        method=cfg.method,
    )
