# SPDX-License-Identifier: GPL-3.0-or-later
"""
Utility functions for cubictele.

General-purpose helpers used by the exporters and the command line.

Copyright (C) 2024 cubictele Contributors
Licensed under GPL-3.0-or-later
"""

import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional


def format_sig(value: float, digits: int = 3) -> str:
    """Format a number with a fixed count of significant digits."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "nan"
    if value == 0:
        return "0"
    return f"{value:.{digits - 1}e}" if abs(value) < 1e-3 or abs(value) >= 1e4 else f"{value:.{digits}g}"


def format_energy(joules: float) -> str:
    """Format a pulse energy in joules with 3 significant digits."""
    return f"{format_sig(joules, 3)} J"


def format_float(value: Any) -> str:
    """Round-trippable text for a float; NaN is written as 'nan'."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def json_float(value: Any) -> Optional[float]:
    """Float for JSON output, with NaN and infinities mapped to null."""
    value = float(value)
    return value if math.isfinite(value) else None


def json_safe(payload: Any) -> Any:
    """Copy of a JSON payload with every float passed through ``json_float``."""
    if isinstance(payload, dict):
        return {key: json_safe(value) for key, value in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [json_safe(value) for value in payload]
    if isinstance(payload, float):
        return json_float(payload)
    return payload


def timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def safe_mkdir(path: Path, parents: bool = True, exist_ok: bool = True) -> Path:
    """
    Create an output directory and return it.

    A plain file at ``path`` is left alone and raises FileExistsError.
    """
    path = Path(path)
    path.mkdir(parents=parents, exist_ok=exist_ok)
    return path
