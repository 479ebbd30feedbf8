import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

TOOL_NAME = "mityuk"


def _jsonable(value: Any) -> Any:
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if hasattr(value, "value"):
        return value.value
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _strict(value: Any) -> Any:
    """Recursively convert to JSON types; NaN and infinities become null."""
    if isinstance(value, dict):
        return {str(k): _strict(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_strict(v) for v in value]
    if isinstance(value, (str, bool, int)) or value is None:
        return value
    if isinstance(value, (float, np.floating)):
        return float(value) if np.isfinite(value) else None
    return _strict(_jsonable(value))


def to_json(payload: Any) -> str:
    return json.dumps(_strict(payload), indent=2, sort_keys=True, allow_nan=False)


def build_report(
    kind: str,
    result: Any,
    config: Optional[Dict[str, Any]] = None,
    timestamp: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Report envelope. Only meta.generated_at changes between identical runs.
    """
    return {
        "meta": {
            "tool": TOOL_NAME,
            "kind": kind,
            "generated_at": timestamp or datetime.now(timezone.utc).isoformat(),
        },
        "config": config or {},
        "result": result,
    }


def write_report(
    path: Union[str, Path],
    kind: str,
    result: Any,
    config: Optional[Dict[str, Any]] = None,
    timestamp: Optional[str] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_json(build_report(kind, result, config, timestamp)) + "\n")
    return path


def write_table(path: Union[str, Path], frame: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g", na_rep="")
    return path


def error_record(error: Exception, code: Optional[str] = None) -> str:
    record = error.to_record() if hasattr(error, "to_record") else {
        "error": code or "internal",
        "message": str(error),
        "details": {"type": type(error).__name__},
    }
    return json.dumps(record, sort_keys=True, default=_jsonable)
