"""Conversion of numpy-laden results to JSON-ready Python values."""

from __future__ import annotations

import math

import numpy as np

__all__ = ["plain"]


def plain(value):
    """Recursively convert numpy values to JSON-ready Python values; non-finite floats become None."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value
