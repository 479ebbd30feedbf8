#!/usr/bin/env python3
"""
Mityuk's radius R(G, alpha) and Mityuk's function m(G, alpha).

For the canonical domain "unit disk with circular/radial slits" the map is
Phi(z) = c (z - alpha) exp((z - alpha) f(z)) with A f = gamma + h + i mu on
the boundary, where

    A(t)     = exp(i(pi/2 - theta(t))) (eta(t) - alpha)
    gamma(t) = Im[exp(-i theta(t)) log(eta(t) - alpha)]

and theta = pi/2 on the outer curve. Solving the integral equation gives the
piecewise constant h; then c = exp(-h_0), R = exp(h_0), m = h_0 / (2 pi).
"""

import logging
import re
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import (
    BoundaryIndeterminateError,
    ConfigError,
    PointNotInteriorError,
    SlitArityError,
)
from core.geometry import (
    Domain,
    DomainGeometry,
    PointClass,
    SlitDomain,
    classify_point,
    open_up_psi2,
    open_up_psi2_deriv,
)
from core.kernel import CoefficientA, assemble_kernels
from core.solver import DensityAndConstants, SolverConfig, solve_density

logger = logging.getLogger(__name__)

CIRCULAR: float = np.pi / 2
RADIAL: float = 0.0

_SLIT_WORDS: Dict[str, float] = {
    "c": CIRCULAR, "circ": CIRCULAR, "circular": CIRCULAR, "pi/2": CIRCULAR,
    "r": RADIAL, "rad": RADIAL, "radial": RADIAL, "0": RADIAL,
}


# =========================
# CONFIGURATION AND TYPES
# =========================
@dataclass(frozen=True)
class SlitSpec:
    """
    Oblique angles (theta_1, ..., theta_ell) of the image slits.

    pi/2 maps the component to a circular slit, 0 to a radial slit. Other
    angles are accepted only with experimental=True.
    """

    thetas: Tuple[float, ...]
    experimental: bool = False

    def __post_init__(self) -> None:
        thetas = tuple(float(t) for t in self.thetas)
        object.__setattr__(self, "thetas", thetas)
        if not self.experimental:
            for t in thetas:
                if not (abs(t - CIRCULAR) < 1e-12 or abs(t - RADIAL) < 1e-12):
                    raise ConfigError(
                        f"slit angle {t} is neither 0 (radial) nor pi/2 (circular)",
                        {"thetas": list(thetas)},
                    )

    @classmethod
    def parse(cls, spec: Union[str, Sequence[Union[str, float]]], experimental: bool = False) -> "SlitSpec":
        """
        Parse 'pi/2,0', 'c,r', 'circular,radial' or a list of numbers.

        An empty string gives the empty vector (simply connected domain).
        """
        items = [s for s in re.split(r"[,\s]+", spec.strip()) if s] if isinstance(spec, str) else list(spec)
        thetas: List[float] = []
        for item in items:
            if isinstance(item, str):
                key = item.strip().lower()
                if key in _SLIT_WORDS:
                    thetas.append(_SLIT_WORDS[key])
                    continue
                try:
                    thetas.append(float(key))
                except ValueError as e:
                    raise ConfigError(f"cannot read slit angle {item!r}") from e
            else:
                thetas.append(float(item))
        return cls(tuple(thetas), experimental)

    @classmethod
    def uniform(cls, ell: int, theta: float = CIRCULAR) -> "SlitSpec":
        return cls(tuple([theta] * ell))

    @property
    def ell(self) -> int:
        return len(self.thetas)

    @property
    def full(self) -> np.ndarray:
        """(pi/2, theta_1, ..., theta_ell), the outer curve first."""
        return np.array((CIRCULAR,) + self.thetas)

    @property
    def labels(self) -> List[str]:
        out = []
        for t in self.thetas:
            if abs(t - CIRCULAR) < 1e-12:
                out.append("circular")
            elif abs(t - RADIAL) < 1e-12:
                out.append("radial")
            else:
                out.append(f"oblique:{t:.6g}")
        return out

    def check_arity(self, ell: int) -> None:
        if self.ell != ell:
            raise SlitArityError(
                f"slit vector has {self.ell} entries but the domain has {ell} inner components",
                {"slits": self.ell, "ell": ell},
            )


@dataclass(frozen=True)
class MityukConfig:
    """
    Settings for one evaluation.

    Attributes:
        solver: linear solver settings
        guard_factor: alpha closer than guard_factor * local node spacing to the
            boundary is rejected
        boundary_values: also return Phi at the boundary nodes
    """

    solver: SolverConfig = field(default_factory=SolverConfig)
    guard_factor: float = 1e-3
    boundary_values: bool = False

    @classmethod
    def from_dict(cls, config: Optional[Dict[str, Any]] = None) -> "MityukConfig":
        config = dict(config or {})
        unknown = set(config) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError("unknown evaluation settings", {"keys": sorted(unknown)})
        solver = config.pop("solver", None)
        if not isinstance(solver, SolverConfig):
            solver = SolverConfig.from_dict(solver)
        return cls(solver=solver, **config)

    def to_dict(self) -> Dict[str, Any]:
        return {"solver": self.solver.to_dict(), "guard_factor": self.guard_factor,
                "boundary_values": self.boundary_values}


@dataclass(frozen=True)
class MityukResult:
    """
    Mityuk's radius and function at one point alpha.

    slit_params: circular slits report the radius exp(-R_k) in (0, 1), radial
    slits the angle R_k in (-pi, pi].
    """

    alpha: complex
    h0: float
    R: float
    m: float
    c: float
    slit_params: Tuple[float, ...]
    constancy_residuals: Tuple[float, ...]
    thetas: Tuple[float, ...]
    n: int
    residual: float
    method: str
    boundary_values: Optional[np.ndarray] = None

    @property
    def robin(self) -> float:
        """Robin function value -m (meaningful for the all-circular canonical domain)."""
        return -self.m

    @property
    def max_constancy_residual(self) -> float:
        return float(max(self.constancy_residuals))

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            "alpha": [self.alpha.real, self.alpha.imag],
            "h0": self.h0,
            "R": self.R,
            "m": self.m,
            "c": self.c,
            "robin": self.robin,
            "slit_params": list(self.slit_params),
            "slit_types": SlitSpec(self.thetas[1:], experimental=True).labels,
            "constancy_residuals": list(self.constancy_residuals),
            "thetas": list(self.thetas),
            "n": self.n,
            "residual": self.residual,
            "method": self.method,
        }
        if self.boundary_values is not None:
            record["boundary_values"] = [[w.real, w.imag] for w in self.boundary_values]
        return record

    def csv_row(self) -> Dict[str, float]:
        return {
            "alpha_re": self.alpha.real,
            "alpha_im": self.alpha.imag,
            "R": self.R,
            "m": self.m,
            "residual": self.max_constancy_residual,
        }


# =========================
# RIGHT-HAND SIDE
# =========================
def _local_spacing(domain: DomainGeometry, alpha: complex) -> float:
    nodes = domain.nodes
    j = int(np.argmin(np.abs(nodes - alpha)))
    k, local = divmod(j, domain.n)
    ring = domain.boundaries[k].nodes
    return float(max(abs(ring[(local + 1) % domain.n] - ring[local]),
                     abs(ring[local] - ring[local - 1])))


def check_interior(domain: Domain, alpha: complex, guard: Optional[float] = None) -> None:
    """
    Raise unless alpha is an interior point at distance > guard from the boundary.

    Raises:
        BoundaryIndeterminateError: alpha within the guard distance
        PointNotInteriorError: alpha outside the domain or inside a hole
    """
    cls = classify_point(domain, alpha, guard)
    where = {"alpha": [complex(alpha).real, complex(alpha).imag]}
    if cls is PointClass.BOUNDARY:
        raise BoundaryIndeterminateError("alpha is too close to the boundary", where)
    if cls is not PointClass.INTERIOR:
        raise PointNotInteriorError("alpha is not an interior point of the domain", where)


def _continuous_arg(diff: np.ndarray, component: int) -> np.ndarray:
    arg = np.unwrap(np.angle(diff))
    closing = arg[-1] + np.angle(diff[0] / diff[-1]) - arg[0]
    if abs(closing) > 1e-6:
        raise PointNotInteriorError(
            "eta - alpha winds around 0 on a radial-slit component; alpha is inside a hole",
            {"component": component, "closing": float(closing)},
        )
    return arg


def build_rhs(domain: DomainGeometry, alpha: complex, slits: SlitSpec,
              guard_factor: float = 1e-3) -> Tuple[CoefficientA, np.ndarray]:
    """
    Sample A, A' and gamma at all nodes.

    theta = pi/2 components get gamma = -log|eta - alpha|; theta = 0 components
    get a continuous branch of arg(eta - alpha) along the component.

    Args:
        domain: boundary geometry
        alpha: evaluation point, interior
        slits: slit vector of length ell
        guard_factor: guard as a multiple of the local node spacing

    Returns:
        (CoefficientA, gamma)
    """
    slits.check_arity(domain.ell)
    alpha = complex(alpha)
    check_interior(domain, alpha, guard_factor * _local_spacing(domain, alpha))

    values, derivs, gammas = [], [], []
    for k, (boundary, theta) in enumerate(zip(domain.boundaries, slits.full)):
        rot = np.exp(1j * (np.pi / 2 - theta))
        diff = boundary.nodes - alpha
        values.append(rot * diff)
        derivs.append(rot * boundary.first_derivs)
        log_abs = np.log(np.abs(diff))
        if abs(theta - CIRCULAR) < 1e-12:
            gammas.append(-log_abs)
        else:
            arg = _continuous_arg(diff, k)
            gammas.append(np.cos(theta) * arg - np.sin(theta) * log_abs)

    return CoefficientA(np.concatenate(values), np.concatenate(derivs)), np.concatenate(gammas)


# =========================
# EVALUATION
# =========================
def _wrap_angle(x: float) -> float:
    wrapped = float(np.mod(x + np.pi, 2 * np.pi) - np.pi)
    return np.pi if wrapped == -np.pi else wrapped


def _slit_params(h_means: np.ndarray, slits: SlitSpec) -> Tuple[float, ...]:
    h0 = float(h_means[0])
    out = []
    for theta, hk in zip(slits.thetas, h_means[1:]):
        r_k = h0 * np.sin(theta) - float(hk)
        if abs(theta - CIRCULAR) < 1e-12:
            out.append(float(np.exp(-r_k)))
        elif abs(theta - RADIAL) < 1e-12:
            out.append(_wrap_angle(r_k))
        else:
            out.append(float(r_k))
    return tuple(out)


def boundary_map(domain: DomainGeometry, alpha: complex, slits: SlitSpec,
                 density: DensityAndConstants, guard_factor: float = 1e-3) -> np.ndarray:
    """
    Phi at every boundary node: f = (gamma + h + i mu)/A, Phi = c (eta - alpha) exp((eta - alpha) f).

    The pointwise h is used, so the boundary-condition residual equals the
    discrete constancy error of h.
    """
    A, gamma = build_rhs(domain, alpha, slits, guard_factor)
    f = (gamma + density.h + 1j * density.mu) / A.values
    diff = domain.nodes - complex(alpha)
    c = np.exp(-density.h0)
    return c * diff * np.exp(diff * f)


def boundary_condition_residuals(domain: DomainGeometry, slits: SlitSpec, values: np.ndarray) -> Dict[str, Any]:
    """
    ||Phi| - 1| on the outer curve and the spread of Im[exp(-i theta_k) log Phi] per component.

    Graded corner nodes are skipped.
    """
    n = domain.n
    keep = ~domain.corner_mask
    spreads = []
    for k, theta in enumerate(slits.full):
        part = domain.component_slice(k)
        w = values[part]
        log_w = np.log(np.abs(w)) + 1j * np.unwrap(np.angle(w))
        spreads.append(float(np.std(np.imag(np.exp(-1j * theta) * log_w)[keep[part]])))
    outer = values[:n][keep[:n]]
    return {"outer_modulus_error": float(np.max(np.abs(np.abs(outer) - 1.0))), "component_spread": spreads}


def slit_extents(domain: DomainGeometry, slits: SlitSpec, values: np.ndarray) -> List[Dict[str, Any]]:
    """
    Geometry of the image slits: angular range of circular slits, radial range of radial slits.
    """
    n = domain.n
    out = []
    for k, label in enumerate(slits.labels, start=1):
        w = values[k * n:(k + 1) * n]
        if label == "circular":
            arg = np.unwrap(np.angle(w))
            out.append({"component": k, "type": label, "radius": float(np.mean(np.abs(w))),
                        "angle_range": [float(arg.min()), float(arg.max())]})
        else:
            out.append({"component": k, "type": label, "angle": _wrap_angle(float(np.mean(np.unwrap(np.angle(w))))),
                        "radius_range": [float(np.abs(w).min()), float(np.abs(w).max())]})
    return out


def mityuk_values(domain: DomainGeometry, alpha: complex, slits: SlitSpec,
                  cfg: Optional[MityukConfig] = None) -> MityukResult:
    """
    Full pipeline at one point: build_rhs -> kernels -> solve -> R, m, c, slit parameters.

    Args:
        domain: boundary geometry
        alpha: interior evaluation point
        slits: slit vector
        cfg: evaluation settings

    Returns:
        MityukResult
    """
    cfg = cfg or MityukConfig()
    alpha = complex(alpha)
    A, gamma = build_rhs(domain, alpha, slits, cfg.guard_factor)
    kernels = assemble_kernels(domain, A)
    density = solve_density(kernels.N, kernels.M, gamma, cfg.solver, n=domain.n, exclude=domain.corner_mask)

    h0 = density.h0
    values = None
    if cfg.boundary_values:
        values = boundary_map(domain, alpha, slits, density, cfg.guard_factor)

    result = MityukResult(
        alpha=alpha,
        h0=h0,
        R=float(np.exp(h0)),
        m=h0 / (2.0 * np.pi),
        c=float(np.exp(-h0)),
        slit_params=_slit_params(density.h_means, slits),
        constancy_residuals=tuple(float(r) for r in density.h_residuals),
        thetas=tuple(float(t) for t in slits.full),
        n=domain.n,
        residual=density.residual,
        method=density.method,
        boundary_values=values,
    )
    logger.debug("✅ R(G, %s) = %.15g  m = %.15g", alpha, result.R, result.m)
    return result


def mityuk_via_openup(slit_domain: SlitDomain, alpha: complex, slits: SlitSpec,
                      cfg: Optional[MityukConfig] = None) -> MityukResult:
    """
    Mityuk's radius of a domain with a straight slit, via the open-up map.

    zeta = psi2(L(z)) with L(z) = (z - a)/(b - a) turns the slit into the unit
    circle; then R(G, alpha) = R(G', zeta(alpha)) / |psi2'(L(alpha)) L'|.

    Raises:
        BoundaryIndeterminateError: alpha on the slit or within the guard
        PointNotInteriorError: alpha outside the outer curve
    """
    cfg = cfg or MityukConfig()
    slits.check_arity(1)
    alpha = complex(alpha)
    check_interior(slit_domain, alpha)

    normalized = slit_domain.normalize(alpha)
    zeta = complex(open_up_psi2(normalized))
    dzeta = complex(open_up_psi2_deriv(normalized)) * slit_domain.scale
    opened = slit_domain.opened_up()
    inner = mityuk_values(opened, zeta, slits, cfg)

    R = inner.R / abs(dzeta)
    h0 = float(np.log(R))
    # Phi_G = exp(-i arg zeta'(alpha)) * Phi_{G'}(zeta(z)) keeps Phi_G'(alpha) > 0
    rotation = np.exp(-1j * np.angle(dzeta))
    slit_params = tuple(
        _wrap_angle(p - np.angle(dzeta)) if abs(t - RADIAL) < 1e-12 else p
        for p, t in zip(inner.slit_params, slits.thetas)
    )
    values = None if inner.boundary_values is None else rotation * inner.boundary_values

    return MityukResult(
        alpha=alpha,
        h0=h0,
        R=R,
        m=h0 / (2.0 * np.pi),
        c=1.0 / R,
        slit_params=slit_params,
        constancy_residuals=inner.constancy_residuals,
        thetas=inner.thetas,
        n=inner.n,
        residual=inner.residual,
        method=inner.method,
        boundary_values=values,
    )


def evaluate(domain: Domain, alpha: complex, slits: SlitSpec, cfg: Optional[MityukConfig] = None) -> MityukResult:
    """Dispatch to mityuk_values or mityuk_via_openup depending on the domain type."""
    if isinstance(domain, SlitDomain):
        return mityuk_via_openup(domain, alpha, slits, cfg)
    return mityuk_values(domain, alpha, slits, cfg)
