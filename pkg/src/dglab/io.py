"""Field/coefficient file format and JSON/CSV helpers.

A field file is one line of JSON header followed by one line of base64
holding the little-endian float64 payload in time-major order.  Coefficient
files carry three payload lines: A (row-major d x d per cell), B, g.
"""

from __future__ import annotations

import base64
import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .errors import ConfigurationError
from .fields import CoefficientField, Cylinder, GridField, GridSpec

FORMAT_VERSION = 1


def _header(spec: GridSpec) -> dict[str, Any]:
    dom = spec.domain
    return {
        "version": FORMAT_VERSION,
        "d": spec.d,
        "nt": spec.nt,
        "nx": list(spec.nx),
        "t_lo": dom.t_lo,
        "t_hi": dom.t_hi,
        "center": list(dom.center),
        "radius": dom.radius,
        "order": "time-major",
    }


def _spec_from_header(h: dict[str, Any]) -> GridSpec:
    if h.get("version") != FORMAT_VERSION:
        raise ConfigurationError(f"unsupported field format version {h.get('version')!r}")
    if h.get("order") != "time-major":
        raise ConfigurationError(f"unsupported payload order {h.get('order')!r}")
    dom = Cylinder(float(h["t_lo"]), float(h["t_hi"]), tuple(h["center"]), float(h["radius"]))
    return GridSpec(int(h["d"]), int(h["nt"]), tuple(h["nx"]), dom)


def _encode(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii")


def _decode(text: str, count: int) -> np.ndarray:
    raw = base64.b64decode(text.strip(), validate=True)
    arr = np.frombuffer(raw, dtype="<f8")
    if arr.size != count:
        raise ConfigurationError(f"payload holds {arr.size} values, header implies {count}")
    return arr.astype(np.float64)


def dumps_field(u: GridField) -> str:
    return json.dumps(_header(u.spec)) + "\n" + _encode(u.values) + "\n"


def loads_field(text: str) -> GridField:
    lines = text.splitlines()
    if len(lines) < 2:
        raise ConfigurationError("field file needs a header line and a payload line")
    try:
        spec = _spec_from_header(json.loads(lines[0]))
        return GridField(spec, _decode(lines[1], math.prod(spec.shape)).reshape(spec.shape))
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"malformed field file: {exc}") from exc


def write_field(path: str | Path, u: GridField) -> None:
    Path(path).write_text(dumps_field(u))


def read_field(path: str | Path) -> GridField:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read field file {path}: {exc}") from exc
    return loads_field(text)


def dumps_coefficients(c: CoefficientField) -> str:
    h = _header(c.spec)
    h.update({"lambda": c.lam, "Lambda": c.Lam, "q": c.q})
    return "\n".join([json.dumps(h), _encode(c.A), _encode(c.B), _encode(c.g)]) + "\n"


def loads_coefficients(text: str) -> CoefficientField:
    lines = text.splitlines()
    if len(lines) < 4:
        raise ConfigurationError("coefficient file needs a header and three payload lines")
    try:
        h = json.loads(lines[0])
        spec = _spec_from_header(h)
        n, d = math.prod(spec.shape), spec.d
        A = _decode(lines[1], n * d * d)
        B = _decode(lines[2], n * d)
        g = _decode(lines[3], n)
        return CoefficientField(spec, A, B, g, lam=float(h["lambda"]), Lam=float(h["Lambda"]), q=float(h["q"]))
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"malformed coefficient file: {exc}") from exc


def write_coefficients(path: str | Path, c: CoefficientField) -> None:
    Path(path).write_text(dumps_coefficients(c))


def read_coefficients(path: str | Path) -> CoefficientField:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read coefficient file {path}: {exc}") from exc
    return loads_coefficients(text)


def jsonable(obj: Any) -> Any:
    """Recursively convert to plain JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    return obj


def dumps_json(obj: Any) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def dumps_csv(header: list[str], rows: Iterable[Iterable[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()
