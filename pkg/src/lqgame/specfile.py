"""Reading and writing game-spec files.

A spec file is a JSON document with keys ``n, p, N, m, A, B, C, D, Q, R,
delta, ref``. Matrices are row-major nested arrays; ``B, D, Q, delta, ref``
hold one entry per player and ``R`` is an N x N array of matrices. Error
messages number players and rows from 1. A reference
is ``{"kind": "zero"}``, ``{"kind": "constant", "value": [...]}`` or
``{"kind": "sequence", "values": [[...], ...]}``.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .model import GameSpec, ReferenceSignal, validate

KEYS = ("n", "p", "N", "m", "A", "B", "C", "D", "Q", "R", "delta", "ref")


class SpecParseError(ValueError):
    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        super().__init__((", ".join(where) + ": " if where else "") + message)


def _matrix(value, key, rows=None, cols=None):
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise SpecParseError("expected a non-empty list of rows", key)
    width = len(value[0])
    for k, row in enumerate(value):
        if len(row) != width:
            raise SpecParseError(f"row {k + 1} has {len(row)} entries, row 1 has {width}", key)
        for x in row:
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                raise SpecParseError(f"row {k + 1} holds a non-numeric entry {x!r}", key)
    M = np.array(value, dtype=float)
    if rows is not None and M.shape[0] != rows:
        raise SpecParseError(f"has {M.shape[0]} rows, expected {rows}", key)
    if cols is not None and M.shape[1] != cols:
        raise SpecParseError(f"has {M.shape[1]} columns, expected {cols}", key)
    return M


def _vector(value, key, length):
    if not isinstance(value, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
        raise SpecParseError("expected a list of numbers", key)
    if len(value) != length:
        raise SpecParseError(f"has length {len(value)}, expected {length}", key)
    return np.array(value, dtype=float)


def _per_player(doc, key, N):
    value = doc[key]
    if not isinstance(value, list) or len(value) != N:
        raise SpecParseError(f"expected a list with N={N} entries", key)
    return value


def _reference(entry, key, p):
    if not isinstance(entry, dict) or "kind" not in entry:
        raise SpecParseError('expected an object with a "kind" field', key)
    kind = entry["kind"]
    if kind == "zero":
        return ReferenceSignal.zero()
    if kind == "constant":
        return ReferenceSignal.constant(_vector(entry.get("value"), key, p))
    if kind == "sequence":
        vals = entry.get("values")
        if not isinstance(vals, list) or not vals:
            raise SpecParseError("sequence needs a non-empty values list", key)
        return ReferenceSignal.sequence([_vector(v, f"{key}.values[{k + 1}]", p) for k, v in enumerate(vals)])
    raise SpecParseError(f"unknown reference kind {kind!r}", key)


def parse_spec(text: str) -> GameSpec:
    """Parse and validate a spec document; raises :class:`SpecParseError`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(exc.msg, line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise SpecParseError("top level must be an object")
    missing = [k for k in KEYS if k not in doc]
    if missing:
        raise SpecParseError("missing keys " + ", ".join(missing))
    for k in ("n", "p", "N"):
        if not isinstance(doc[k], int) or isinstance(doc[k], bool) or doc[k] < 1:
            raise SpecParseError("expected a positive integer", k)
    n, p, N = doc["n"], doc["p"], doc["N"]
    m = _per_player(doc, "m", N)
    if not all(isinstance(x, int) and not isinstance(x, bool) and x >= 1 for x in m):
        raise SpecParseError("expected positive integers", "m")
    A = _matrix(doc["A"], "A", n, n)
    C = _matrix(doc["C"], "C", p, n)
    B = [_matrix(b, f"B[{i + 1}]", n, m[i]) for i, b in enumerate(_per_player(doc, "B", N))]
    D = [_matrix(d, f"D[{i + 1}]", p, m[i]) for i, d in enumerate(_per_player(doc, "D", N))]
    Q = [_matrix(q, f"Q[{i + 1}]", p, p) for i, q in enumerate(_per_player(doc, "Q", N))]
    R = []
    for i, row in enumerate(_per_player(doc, "R", N)):
        if not isinstance(row, list) or len(row) != N:
            raise SpecParseError(f"expected N={N} matrices", f"R[{i + 1}]")
        R.append([_matrix(r, f"R[{i + 1}][{j + 1}]", m[j], m[j]) for j, r in enumerate(row)])
    delta = _vector(_per_player(doc, "delta", N), "delta", N)
    ref = [_reference(r, f"ref[{i + 1}]", p) for i, r in enumerate(_per_player(doc, "ref", N))]
    spec = GameSpec(A, tuple(B), C, tuple(D), tuple(Q), tuple(tuple(r) for r in R), tuple(delta), tuple(ref))
    report = validate(spec)
    if not report.ok:
        raise SpecParseError("; ".join(report.violations))
    return spec


def load_spec(path) -> GameSpec:
    return parse_spec(Path(path).read_text(encoding="utf-8"))


def _ref_doc(r: ReferenceSignal):
    if r.kind == "zero":
        return {"kind": "zero"}
    if r.kind == "constant":
        return {"kind": "constant", "value": r.values[0].tolist()}
    return {"kind": "sequence", "values": [v.tolist() for v in r.values]}


def spec_to_dict(spec: GameSpec) -> dict:
    return {
        "n": spec.n, "p": spec.p, "N": spec.N, "m": list(spec.m),
        "A": spec.A.tolist(),
        "B": [b.tolist() for b in spec.B],
        "C": spec.C.tolist(),
        "D": [d.tolist() for d in spec.D],
        "Q": [q.tolist() for q in spec.Q],
        "R": [[r.tolist() for r in row] for row in spec.R],
        "delta": list(spec.delta),
        "ref": [_ref_doc(r) for r in spec.ref],
    }


def dump_spec(spec: GameSpec) -> str:
    """JSON text with one top-level key per line."""
    doc = spec_to_dict(spec)
    return "{\n" + ",\n".join(f"  {json.dumps(k)}: {json.dumps(v)}" for k, v in doc.items()) + "\n}\n"
