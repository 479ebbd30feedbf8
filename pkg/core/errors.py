"""
Error hierarchy for the Mityuk toolkit.

Every error carries a short machine code so the CLI can emit a stable,
machine-readable error record.
"""

from typing import Any, Dict, Optional


class MityukError(Exception):
    """Base class for all toolkit errors."""

    code: str = "mityuk"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message: str = message
        self.details: Dict[str, Any] = details or {}

    def to_record(self) -> Dict[str, Any]:
        return {"error": self.code, "message": self.message, "details": self.details}


class GeometryError(MityukError, ValueError):
    code = "geometry"


class OrientationError(GeometryError):
    code = "orientation"


class ContainmentError(GeometryError):
    code = "containment"


class PointNotInteriorError(MityukError, ValueError):
    code = "point-not-interior"


class BoundaryIndeterminateError(PointNotInteriorError):
    code = "boundary-indeterminate"


class SlitArityError(MityukError, ValueError):
    code = "slit-arity"


class KernelError(MityukError, ValueError):
    code = "kernel"


class SolverError(MityukError):
    code = "solver"


class ConvergenceError(SolverError):
    """Iterative solve stopped at max_iter; `details['residual']` holds the achieved residual."""

    code = "no-convergence"


class ConfigError(MityukError, ValueError):
    code = "config"


class UnknownDemoError(MityukError, KeyError):
    code = "unknown-demo"

    def __str__(self) -> str:
        return self.message
