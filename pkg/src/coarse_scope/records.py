"""Deterministic JSON-lines record stream."""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import IO, Any

FLOAT_DIGITS = 12


def _clean(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return str(obj)
        x = float(f"{obj:.{FLOAT_DIGITS}g}")
        return 0.0 if x == 0 else x
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "to_json"):
        return _clean(obj.to_json())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(record: dict) -> str:
    return json.dumps(_clean(record), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


class RecordWriter:
    """Writes one JSON object per line to every sink."""

    def __init__(self, *sinks: IO[str]):
        self.sinks = [s for s in sinks if s is not None]

    def emit(self, kind: str, presentation: str | None = None, /, **fields) -> None:
        rec = {"record": kind}
        if presentation is not None:
            rec["presentation"] = presentation
        rec.update(fields)
        line = dumps(rec)
        for s in self.sinks:
            s.write(line + "\n")
