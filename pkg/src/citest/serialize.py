"""Deterministic JSON emission.

The stdlib encoder offers no hook for float formatting, and the output
contract calls for p-values written as 17-significant-digit decimals (the
shortest length guaranteed to round-trip a double). This tiny emitter
formats every float with %.17g, keeps dict insertion order, and therefore
produces byte-identical documents for identical inputs.
"""

from __future__ import annotations

import json
import math


def _escape(text):
    return json.dumps(text)  # stdlib handles string escaping


def _emit(value, out, indent, level):
    pad = " " * (indent * (level + 1))
    closing = " " * (indent * level)
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, str):
        out.append(_escape(value))
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        if math.isnan(value):
            out.append("null")
        elif math.isinf(value):
            out.append('"Infinity"' if value > 0 else '"-Infinity"')
        else:
            out.append(format(value, ".17g"))
    elif isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        for i, (key, item) in enumerate(value.items()):
            out.append(f"{pad}{_escape(str(key))}: ")
            _emit(item, out, indent, level + 1)
            out.append(",\n" if i < len(value) - 1 else "\n")
        out.append(f"{closing}}}")
    elif isinstance(value, (list, tuple)):
        if not len(value):
            out.append("[]")
            return
        out.append("[\n")
        for i, item in enumerate(value):
            out.append(pad)
            _emit(item, out, indent, level + 1)
            out.append(",\n" if i < len(value) - 1 else "\n")
        out.append(f"{closing}]")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(value, indent=2):
    """Serialize to JSON text with %.17g floats and stable key order."""
    out = []
    _emit(value, out, indent, 0)
    out.append("\n")
    return "".join(out)
