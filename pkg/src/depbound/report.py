"""Bit-stable JSON and CSV output."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, is_dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

FLOAT_FMT = ".17g"


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, FLOAT_FMT)


def to_plain(obj: Any) -> Any:
    """Reduce to dict / list / str / int / float / bool / None."""
    if hasattr(obj, "to_dict"):
        return to_plain(obj.to_dict())
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "value"):  # LogValue
        return float(obj.value)
    return str(obj)


def _dump(obj: Any, out: list, indent: int, level: int) -> None:
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for k, key in enumerate(sorted(obj)):
            out.append(("," if k else "") + pad + _json_str(key) + ": ")
            _dump(obj[key], out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
            return
        out.append("[")
        for k, v in enumerate(obj):
            out.append(("," if k else "") + pad)
            _dump(v, out, indent, level + 1)
        out.append(end + "]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(fmt_float(obj))
    else:
        out.append(_json_str(str(obj)))


def _json_str(s: str) -> str:
    return json.dumps(s, ensure_ascii=False)


def dumps_json(obj: Any, indent: int = 2) -> str:
    """Sorted keys, floats at 17 significant digits, non-finite as Infinity / NaN."""
    out: list[str] = []
    _dump(to_plain(obj), out, indent, 0)
    return "".join(out) + "\n"


def dumps_csv(rows: Sequence[dict], columns: Sequence[str] | None = None) -> str:
    rows = [to_plain(r) for r in rows]
    if columns is None:
        columns = list(rows[0].keys()) if rows else ["method", "n", "t", "log_bound", "centering"]
    if "t" in columns:
        rows = sorted(rows, key=lambda r: (r.get("t") is None, r.get("t", 0.0)))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def emit_report(results: Any, fmt: str = "json", path: str | Path | None = None,
                columns: Sequence[str] | None = None) -> str:
    """Serialise ``results`` and write them to ``path`` (or just return the text)."""
    if fmt == "json":
        text = dumps_json(results)
    elif fmt == "csv":
        rows = results if isinstance(results, list) else results.get("rows", [])
        text = dumps_csv(rows, columns)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def load_json(text: str) -> Any:
    """Inverse of dumps_json (accepts Infinity / NaN)."""
    return json.loads(text)


def rows_from(reports: Iterable, **fixed) -> list[dict]:
    out = []
    for r in reports:
        d = {"method": r.method, "log_bound": r.log_bound, "centering": r.centering}
        d.update(fixed)
        out.append(d)
    return out
