"""JSON run reports with 17-significant-digit floats, and their bundled schema."""

from __future__ import annotations

import json
import math
from importlib import resources

import numpy as np

SCHEMA_VERSION = "1.0"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _Float(float(obj))
    return obj


class _Float(float):
    pass


def _encode(obj, indent, level) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, _Float):
        if math.isnan(obj):
            return "null"
        if math.isinf(obj):
            # JSON has no infinities; keep the sign readable
            return json.dumps("inf" if obj > 0 else "-inf")
        text = "%.17g" % obj
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    return json.dumps(obj)


def dumps(report: dict, indent: int = 2) -> str:
    return _encode(_clean(report), indent, 0) + "\n"


def load_schema() -> dict:
    return json.loads(resources.files("ppga").joinpath("data/report.schema.json").read_text())
