"""JSON and number formatting with 17 significant digits for every float."""

from __future__ import annotations

import json
import math

import numpy as np


def fmt(x: float) -> str:
    """Round-trip safe text for a float."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _encode(obj, indent: str, step: str) -> str:
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no non-finite numbers; spell them as strings
        return fmt(x) if math.isfinite(x) else json.dumps(fmt(x))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    inner = indent + step
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_encode(v, inner, step)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + indent + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [f"{inner}{_encode(v, inner, step)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + indent + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Like json.dumps(obj, indent=indent) but floats keep 17 significant digits."""
    return _encode(obj, "", " " * indent)
