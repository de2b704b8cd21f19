"""CSV and JSON emission with a fixed number format and key order."""
import csv
import json
import math
import os
from pathlib import Path

import numpy as np

__all__ = ["OUTPUT_ENV", "output_dir", "format_number", "write_csv", "write_json", "to_jsonable"]

OUTPUT_ENV = "VACUUMLAB_OUTPUT_DIR"


def output_dir(configured=None, explicit=None):
    """Explicit flag, then the environment override, then the configured value."""
    path = explicit or os.environ.get(OUTPUT_ENV) or configured or "vacuumlab_out"
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def format_number(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return "%.17g" % v
    return str(v)


def write_csv(path, header, rows):
    """RFC-4180 CSV with a header row and 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_number(v) for v in row])
    return Path(path)


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no infinities; keep them readable and round-trippable as strings
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "as_json"):
        return to_jsonable(obj.as_json())
    return str(obj)


def write_json(path, obj):
    """UTF-8 JSON with sorted keys."""
    text = json.dumps(to_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False)
    Path(path).write_text(text + "\n", encoding="utf-8")
    return Path(path)
