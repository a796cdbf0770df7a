"""Deterministic JSON and CSV emission for reports."""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

SIG_DIGITS = 6


def round_sig(x: float, digits: int = SIG_DIGITS) -> float:
    if x == 0 or not math.isfinite(x):
        return x
    return float(f"{x:.{digits}g}")


def normalise(obj):
    """Recursively convert numpy values and round floats; dict order is kept."""
    if isinstance(obj, dict):
        return {str(k): normalise(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalise(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return normalise(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return round_sig(x)
    return obj


def dumps(obj) -> str:
    return json.dumps(normalise(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (repr(round_sig(float(v))) if isinstance(v, (float, np.floating)) else v) for v in row])
    return buf.getvalue()
