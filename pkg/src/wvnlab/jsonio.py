"""Deterministic JSON/CSV serialization for reports.

Floats are written with 17 significant digits and keys sorted, so identical
inputs produce byte-identical files; CSV uses '.' decimals regardless of
locale.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence


def format_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def dumps(obj, indent: int = 0) -> str:
    """JSON text with deterministic key order and 17-digit floats."""
    pad = " " * indent
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, str):
        out = obj.replace("\\", "\\\\").replace('"', '\\"')
        out = out.replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
        return f'"{out}"'
    if isinstance(obj, dict):
        items = []
        for key in sorted(obj, key=str):
            items.append(f'{pad}  {dumps(str(key))}: '
                         f'{dumps(obj[key], indent + 2)}')
        if not items:
            return "{}"
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        items = [f"{pad}  {dumps(v, indent + 2)}" for v in obj]
        if not items:
            return "[]"
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    try:
        return dumps(float(obj), indent)
    except (TypeError, ValueError):
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [format_float(v) if isinstance(v, float) else str(v)
                     for v in row]
            fh.write(",".join(cells) + "\n")
