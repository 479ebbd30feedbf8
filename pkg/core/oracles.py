#!/usr/bin/env python3
"""
Analytic reference values.

Annulus q < |z| < 1 (circular and radial slit products), the disk and the
center of a square.
Products are accumulated in log space; the radial-slit product alternates
exponents (-1)^j.
"""

from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional

import numpy as np
import scipy.special

from core.errors import ConfigError


@dataclass(frozen=True)
class ProductConfig:
    """Truncation of the infinite products: stop when a factor is within tol of 1."""

    tol: float = 1e-14
    max_terms: int = 200

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ConfigError(f"product tol must be positive, got {self.tol}")
        if self.max_terms < 1:
            raise ConfigError(f"max_terms must be >= 1, got {self.max_terms}")

    @classmethod
    def from_dict(cls, config: Optional[Dict[str, Any]] = None) -> "ProductConfig":
        config = dict(config or {})
        unknown = set(config) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError("unknown product settings", {"keys": sorted(unknown)})
        return cls(**config)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _check_annulus(q: float, r: float) -> None:
    if not 0.0 < q < 1.0:
        raise ValueError(f"inner radius q must lie in (0, 1), got {q}")
    if not q < r < 1.0:
        raise ValueError(f"|alpha| must lie in (q, 1) = ({q}, 1), got {r}")


def _log_factor(q: float, r: float, j: int) -> float:
    q2j = q ** (2 * j)
    return (np.log1p(-q2j * r * r) + np.log1p(-q2j / (r * r)) - 2.0 * np.log1p(-q2j))


def _annulus_log_R(q: float, r: float, alternating: bool, cfg: ProductConfig) -> float:
    total = float(np.log1p(-r * r))
    for j in range(1, cfg.max_terms + 1):
        term = _log_factor(q, r, j)
        total += -term if (alternating and j % 2 == 1) else term
        if abs(np.expm1(term)) < cfg.tol:
            break
    return total


def annulus_R_circular(q: float, r: float, cfg: Optional[ProductConfig] = None) -> float:
    """
    Mityuk's radius of the annulus q < |z| < 1 at |alpha| = r, circular slit.

    R = (1 - r^2) prod_j (1 - q^2j r^2)(1 - q^2j / r^2) / (1 - q^2j)^2
    """
    _check_annulus(q, r)
    return float(np.exp(_annulus_log_R(q, r, False, cfg or ProductConfig())))


def annulus_R_radial(q: float, r: float, cfg: Optional[ProductConfig] = None) -> float:
    """Mityuk's radius of the annulus at |alpha| = r, radial slit: the same factors raised to (-1)^j."""
    _check_annulus(q, r)
    return float(np.exp(_annulus_log_R(q, r, True, cfg or ProductConfig())))


def disk_R(alpha: complex, radius: float = 1.0, center: complex = 0.0) -> float:
    """
    Conformal radius of the disk |z - center| < radius at alpha.

    For the unit disk this is 1 - |alpha|^2 (Moebius map (z - a)/(1 - conj(a) z)).
    """
    rel = abs(complex(alpha) - complex(center))
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if rel >= radius:
        raise ValueError(f"alpha must lie inside the disk, got |alpha - center| = {rel}")
    return (radius * radius - rel * rel) / radius


def square_center_R(half_side: float = 1.0) -> float:
    """
    Conformal radius of the square (-a, a) x (-a, a) at its center: a * 8 sqrt(pi) / Gamma(1/4)^2.

    The Schwarz-Christoffel map f(z) = C * integral (1 + z^4)^(-1/2) sends the
    unit disk onto the square with f'(0) = C.
    """
    if not half_side > 0:
        raise ValueError(f"half side must be positive, got {half_side}")
    return float(half_side * 8.0 * np.sqrt(np.pi) / scipy.special.gamma(0.25) ** 2)
