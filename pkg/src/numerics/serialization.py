"""Deterministic text output: JSON reports and dense matrices."""

import io
import json
from typing import Any

import numpy as np


def _numpy_default(obj: Any) -> Any:
    """json `default=` hook for numpy scalars and arrays."""
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """
    JSON text with a trailing newline.

    Floats are written by repr, the shortest string that parses back to the
    same double (at most 17 significant digits). Non-finite floats raise.
    """
    return json.dumps(obj, indent=indent, default=_numpy_default, allow_nan=False) + "\n"


def matrix_text(matrix: np.ndarray) -> str:
    """Dense square matrix: first line m, then m rows of m values at 17 significant digits."""
    matrix = np.asarray(matrix, dtype=float)
    buffer = io.StringIO()
    np.savetxt(buffer, matrix, fmt="%.17g", header=str(matrix.shape[0]), comments="")
    return buffer.getvalue()
