"""File formats used by the command line: CSV/JSON matrices and JSON reports."""
from __future__ import annotations

import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch


def read_matrix(path, header: bool = False) -> np.ndarray:
    """Read a numeric matrix from ``.json`` (list of rows) or comma-separated text.

    ``header`` skips the first line of a CSV file.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            m = np.asarray(json.load(fh), dtype=float)
    else:
        m = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    if m.ndim != 2:
        raise DimensionMismatch(f"{path} does not hold a matrix")
    return m


def parse_vector(text: str, header: bool = False) -> np.ndarray:
    """Inline ``"1,2,3"`` or the path of a file holding one vector."""
    if os.path.exists(text):
        return read_matrix(text, header).reshape(-1)
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()], dtype=float)
    except ValueError as exc:
        raise DimensionMismatch(f"cannot parse vector {text!r}") from exc


def write_matrix_csv(path, data: np.ndarray) -> None:
    np.savetxt(path, data, delimiter=",", fmt="%.17g")


def jsonable(obj):
    """Convert numpy values and non-finite floats into JSON-safe objects.

    Floats keep their shortest round-trip representation (17 significant
    digits at most); ``inf``, ``-inf`` and ``nan`` become strings.
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False)


def write_json(obj, path=None) -> None:
    text = dumps(obj) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)
