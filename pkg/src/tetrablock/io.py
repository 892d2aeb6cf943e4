"""JSON file formats.

A matrix is ``{"rows": r, "cols": c, "data": [[re, im], ...]}`` with the
data flattened row-major. A triple file is
``{"dim": n, "A": matrix, "B": matrix, "P": matrix, "tol": {...}}`` where
``tol`` is optional. Floats are written in shortest round-trip form, so
``emit_triple(parse_triple(text)) == text`` for canonically formatted input.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .numkit import DEFAULT_TOL, ToleranceProfile
from .triples import OperatorTriple

TOL_FIELDS = ("eq_atol", "psd_slack", "rank_rtol", "contraction_slack")


def _num(x: float):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite value cannot be serialised")
    return x


def matrix_to_json(M) -> dict:
    M = np.asarray(M, complex)
    if M.ndim != 2:
        M = M.reshape(1, -1) if M.ndim < 2 else M
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]),
            "data": [[_num(z.real), _num(z.imag)] for z in M.ravel()]}


def matrix_from_json(obj, where="matrix") -> np.ndarray:
    if not isinstance(obj, dict):
        raise ParseError("matrix must be an object", where)
    try:
        rows, cols, data = obj["rows"], obj["cols"], obj["data"]
    except KeyError as exc:
        raise ParseError(f"matrix is missing key {exc.args[0]!r}", where) from None
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 0 or cols < 0:
        raise ParseError("rows/cols must be non-negative integers", where)
    if not isinstance(data, list) or len(data) != rows * cols:
        raise ParseError(f"data must hold rows*cols = {rows * cols} entries", where)
    vals = np.empty(rows * cols, complex)
    for i, pair in enumerate(data):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)):
            raise ParseError("entries must be [re, im] number pairs", f"{where}.data[{i}]")
        if not (math.isfinite(pair[0]) and math.isfinite(pair[1])):
            raise ParseError("entry is not finite", f"{where}.data[{i}]")
        vals[i] = complex(pair[0], pair[1])
    return vals.reshape(rows, cols)


def tol_to_json(tol: ToleranceProfile) -> dict:
    return {f: getattr(tol, f) for f in TOL_FIELDS}


def tol_from_json(obj) -> ToleranceProfile:
    if obj is None:
        return DEFAULT_TOL
    if not isinstance(obj, dict):
        raise ParseError("tol must be an object", "tol")
    unknown = set(obj) - set(TOL_FIELDS)
    if unknown:
        raise ParseError(f"unknown tolerance fields {sorted(unknown)}", "tol")
    try:
        return ToleranceProfile(**{k: float(v) for k, v in obj.items()})
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), "tol") from None


def triple_to_json(t: OperatorTriple, include_tol=None) -> dict:
    """``tol`` is written only when it differs from the defaults, unless forced."""
    out = {"dim": t.d, "A": matrix_to_json(t.A), "B": matrix_to_json(t.B),
           "P": matrix_to_json(t.P)}
    if include_tol is None:
        include_tol = t.tol != DEFAULT_TOL
    if include_tol:
        out["tol"] = tol_to_json(t.tol)
    return out


def dumps(obj, pretty: bool = False) -> str:
    if pretty:
        return json.dumps(obj, indent=2, allow_nan=False) + "\n"
    return json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n"


def emit_triple(t: OperatorTriple, include_tol=None, pretty: bool = False) -> str:
    return dumps(triple_to_json(t, include_tol), pretty)


def parse_triple(source, check: bool = True) -> OperatorTriple:
    """Load a triple file from a path, ``bytes``/``str`` JSON text, or an already decoded dict.

    Raises :class:`ParseError` for malformed input and
    :class:`ValidationError` when the matrices do not commute.
    """
    obj = load_json(source)
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object", "$")
    for key in ("dim", "A", "B", "P"):
        if key not in obj:
            raise ParseError(f"missing key {key!r}", "$")
    dim = obj["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 0:
        raise ParseError("dim must be a non-negative integer", "dim")
    mats = {}
    for key in "ABP":
        M = matrix_from_json(obj[key], key)
        if M.shape != (dim, dim):
            raise ValidationError(f"{key} has shape {M.shape}, expected ({dim}, {dim})")
        mats[key] = M
    tol = tol_from_json(obj.get("tol"))
    return OperatorTriple(mats["A"], mats["B"], mats["P"], tol, check=check)


def load_json(source):
    if isinstance(source, dict):
        return source
    if isinstance(source, (bytes, bytearray)):
        text = source.decode("utf-8")
    elif isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise ParseError(f"cannot read {source}: {exc.strerror}") from None
    else:
        text = source
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None


def graded_to_json(g) -> dict:
    return {"level_dims": list(g.level_dims), "N": g.N, "edge_note": g.edge_note,
            "T1": matrix_to_json(g.T1), "T2": matrix_to_json(g.T2),
            "T3": matrix_to_json(g.T3)}
