"""Deterministic CSV / JSON writers shared by the CLI and the experiment runner."""
from __future__ import annotations

import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor

SCHEMA_VERSION = 1
THREADS_ENV = "DIRAC_GAPS_THREADS"


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return "%.17g" % x
    return str(x)


def csv_text(name: str, header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(f"# artifact {name} v{SCHEMA_VERSION}\n")
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(fmt(x) for x in r) + "\n")
    return buf.getvalue()


def _clean(o):
    if isinstance(o, float):
        if math.isnan(o) or math.isinf(o):
            return None
        return float("%.17g" % o)
    if isinstance(o, complex):
        return [_clean(o.real), _clean(o.imag)]
    if isinstance(o, dict):
        return {str(k): _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if hasattr(o, "item"):          # numpy scalar
        return _clean(o.item())
    return o


def json_text(obj: dict) -> str:
    obj = dict(obj)
    obj.setdefault("schema_version", SCHEMA_VERSION)
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def pmap(fn, items):
    """Order-preserving map, threaded when DIRAC_GAPS_THREADS > 1."""
    items = list(items)
    k = thread_count()
    if k == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as ex:
        return list(ex.map(fn, items))
