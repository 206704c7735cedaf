"""CSV / JSON writers with a metadata prologue.

Floats are written with ``repr`` (shortest round-trip form), so identical
inputs always produce identical bytes.
"""

from __future__ import annotations

import csv
import json
import math
from fractions import Fraction
from typing import IO, Any, Iterable, Mapping, Sequence

import numpy as np

from . import __version__

TOOL = "dipole-noise"


def _scalar(x: Any) -> Any:
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def jsonable(obj: Any) -> Any:
    """Recursively convert numpy arrays, fractions and sentinels into JSON types."""
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    out = _scalar(obj)
    if isinstance(out, (str, int, float, bool)) or out is None:
        return out
    return str(out)


def format_cell(x: Any) -> str:
    if x is None:
        return ""
    x = _scalar(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def provenance(meta: Mapping[str, Any]) -> dict:
    out = {"tool": TOOL, "version": __version__}
    out.update(meta)
    return out


def write_csv(stream: IO[str], meta: Mapping[str, Any], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """RFC-4180 body preceded by ``# key=value`` lines."""
    writer = csv.writer(stream, lineterminator="\r\n")
    for key, value in provenance(meta).items():
        stream.write(f"# {key}={format_cell(value)}\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])


def write_json(stream: IO[str], meta: Mapping[str, Any], payload: Mapping[str, Any]) -> None:
    doc = {"metadata": jsonable(provenance(meta))}
    doc.update(jsonable(payload))
    stream.write(json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False))
    stream.write("\n")
