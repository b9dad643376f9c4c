"""JSON reading/writing with fixed float formatting.

Floats are written with 17 significant digits, which round-trips IEEE doubles
exactly; NaN and infinities become ``null``.
"""

from __future__ import annotations

import json
import math
import sys

import numpy as np

from .errors import SchemaError


def _encode(obj, out):
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        out.append(format(x, ".17g") if math.isfinite(x) else "null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)) + ": ")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    out = []
    _encode(obj, out)
    return "".join(out)


def load(path: str | None):
    """Read JSON from ``path``, or from stdin when ``path`` is ``None`` or ``"-"``."""
    try:
        if path in (None, "-"):
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        obj = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read JSON input: {exc}") from None
    if not isinstance(obj, dict):
        raise SchemaError("top-level JSON value must be an object")
    return obj
