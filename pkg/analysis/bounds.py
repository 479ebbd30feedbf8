#!/usr/bin/env python3
"""
Lower-bound check R(G, alpha) >= dist(alpha, boundary) over a sampled field.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from analysis.sweep import ScalarField
from core.geometry import Domain, distances_to_boundary

logger = logging.getLogger(__name__)


@dataclass
class BoundReport:
    checked: int
    min_margin: float
    min_margin_at: Optional[complex]
    violations: List[Dict[str, float]] = field(default_factory=list)
    tol: float = 0.0
    excluded: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        at = self.min_margin_at
        return {
            "checked": self.checked,
            "min_margin": self.min_margin,
            "min_margin_at": None if at is None else [at.real, at.imag],
            "violations": self.violations,
            "violation_count": len(self.violations),
            "tol": self.tol,
            "excluded_unreliable": self.excluded,
            "passed": self.passed,
        }


def lower_bound_check(field_: ScalarField, domain: Domain, tol: float = 1e-9) -> BoundReport:
    """
    Compare R with the distance to the discretized boundary at every reliable interior point.

    A point violates the bound when R - d < -tol * max(1, R); the tolerance
    absorbs the round-off at points where equality holds (the disk center).
    Points the sweep flagged as unresolved are skipped and counted.

    Args:
        field_: sampled R on the same domain
        domain: the domain the field was computed on
        tol: relative slack

    Returns:
        BoundReport with the minimum margin and every violation
    """
    inside = field_.reliable
    excluded = int(np.count_nonzero(field_.interior & ~inside))
    z = field_.grid[inside]
    R = field_.values[inside]
    if z.size == 0:
        return BoundReport(0, float("nan"), None, tol=tol, excluded=excluded)

    d = distances_to_boundary(domain, z)
    margin = R - d
    k = int(np.argmin(margin))
    bad = margin < -tol * np.maximum(1.0, R)
    violations = [
        {"x": float(zi.real), "y": float(zi.imag), "R": float(r), "d": float(di), "margin": float(m)}
        for zi, r, di, m in zip(z[bad], R[bad], d[bad], margin[bad])
    ]
    report = BoundReport(int(z.size), float(margin[k]), complex(z[k]), violations, tol, excluded)
    if violations:
        logger.warning("⚠️ R >= d violated at %d points (min margin %.3e)", len(violations), report.min_margin)
    else:
        logger.info("✅ R >= d holds at %d points, min margin %.3e (%d unresolved points skipped)",
                    report.checked, report.min_margin, excluded)
    return report
