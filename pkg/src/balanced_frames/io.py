"""Frame JSON / CSV serialization.

JSON layout::

    {"field": "real" | "complex", "d": int, "K": int, "columns": [[...], ...]}

Columns are listed k = 1..K; complex entries are ``[re, im]`` pairs.  Floats
are written with 17 significant digits so a round-trip is lossless.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .core import Frame, as_frame
from .errors import FrameError


def frame_to_dict(F) -> dict:
    F = as_frame(F)
    if F.is_complex:
        cols = [[[float(z.real), float(z.imag)] for z in col] for col in F.matrix.T]
    else:
        cols = [[float(x) for x in col] for col in F.matrix.T]
    return {"field": F.field, "d": F.d, "K": F.K, "columns": cols}


def frame_from_dict(obj: dict) -> Frame:
    try:
        fld = obj["field"]
        d, K = int(obj["d"]), int(obj["K"])
        cols = obj["columns"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FrameError(f"malformed frame JSON: {exc}") from None
    if len(cols) != K:
        raise FrameError("number of columns does not match K", K=K, columns=len(cols))
    if fld not in ("real", "complex"):
        raise FrameError(f"unknown field {fld!r}")
    try:
        if fld == "complex":
            data = np.array([[complex(re, im) for re, im in col] for col in cols], dtype=complex).reshape(K, d)
        else:
            data = np.array(cols, dtype=float).reshape(K, d)
    except (TypeError, ValueError) as exc:
        raise FrameError(f"malformed frame columns: {exc}", d=d, K=K) from None
    return Frame(data.T, field=fld)


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise FrameError("non-finite value in output", value=repr(x))
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj: Any, indent: int | None = None) -> str:
    """JSON encoding with every float written at 17 significant digits."""
    return _encode(_plain(obj), indent, 0)


def _plain(obj):
    if isinstance(obj, Frame):
        return frame_to_dict(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _encode(obj, indent, level) -> str:
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    nl = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{nl}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        items = [f"{nl}{_encode(v, indent, level + 1)}" for v in obj]
        return "[" + sep.join(items) + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def save_frame(F, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(frame_to_dict(F)))
        fh.write("\n")


def load_frame(path) -> Frame:
    with open(path, encoding="utf-8") as fh:
        return loads_frame(fh.read())


def loads_frame(text: str) -> Frame:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FrameError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if isinstance(obj, dict) and "frame" in obj and "columns" not in obj:
        obj = obj["frame"]
    return frame_from_dict(obj)


def frame_to_csv(F) -> str:
    """One line per frame vector; complex entries written as ``a+bj``."""
    F = as_frame(F)
    lines = []
    for col in F.matrix.T:
        if F.is_complex:
            cells = [f"{_fmt_float(z.real)}{'+' if z.imag >= 0 else '-'}{_fmt_float(abs(z.imag))}j" for z in col]
        else:
            cells = [_fmt_float(float(x)) for x in col]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
