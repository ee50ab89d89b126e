"""JSON report assembly: stable key order, rounded floats, atomic writes."""
from __future__ import annotations

import json
import math
import time

import numpy as np

from .cache import atomic_write

SIGNIFICANT = 12
# keys holding wall-clock data; everything else must be reproducible
VOLATILE = ("timestamp", "wall_clock_s", "timing")


def clean(x, digits: int = SIGNIFICANT):
    """Recursively convert to JSON types, rounding floats to ``digits`` significant digits."""
    if isinstance(x, dict):
        return {str(k): clean(v, digits) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [clean(v, digits) for v in x]
    if isinstance(x, np.ndarray):
        return clean(x.tolist(), digits)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.{digits}g}")
    if x is None or isinstance(x, str):
        return x
    return str(x)


def dumps(obj) -> str:
    return json.dumps(clean(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj):
    atomic_write(path, dumps(obj).encode())


def write_jsonl(path, rows):
    text = "".join(json.dumps(clean(r), sort_keys=True) + "\n" for r in rows)
    atomic_write(path, text.encode())


def timestamp() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def strip_volatile(obj):
    if isinstance(obj, dict):
        return {k: strip_volatile(v) for k, v in obj.items() if k not in VOLATILE}
    if isinstance(obj, list):
        return [strip_volatile(v) for v in obj]
    return obj
