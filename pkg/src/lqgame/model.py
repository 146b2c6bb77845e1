"""Game specification, validation and small matrix helpers.

A game has dynamics ``x+ = A x + sum_i B[i] u_i``, output ``y = C x + sum_i D[i] u_i``
and per-player discounted costs

    1/2 * sum_t delta[i]**(t-1) * ((y_t - l_t^i)' Q[i] (y_t - l_t^i) + sum_j u_j' R[i][j] u_j).

Players are indexed from 0 in the Python API and from 1 in every human-facing
message and file.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SYM_RTOL = 1e-9


def spectral_norm(M) -> float:
    """Largest singular value of ``M``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if not np.all(np.isfinite(M)):
        raise ValueError("spectral_norm: matrix has non-finite entries")
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def symmetrize(M):
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def asymmetry(M) -> float:
    """Relative asymmetry ``||M - M'|| / (1 + ||M||)`` in Frobenius norm."""
    M = np.asarray(M, dtype=float)
    return float(np.linalg.norm(M - M.T) / (1.0 + np.linalg.norm(M)))


def min_eig(M) -> float:
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return np.inf
    return float(np.linalg.eigvalsh(symmetrize(M))[0])


def is_psd(M) -> bool:
    tol = 1e-10 * (1.0 + spectral_norm(M))
    return min_eig(M) >= -tol


def is_pd(M) -> bool:
    tol = 1e-12 * (1.0 + spectral_norm(M))
    return min_eig(M) > tol


def _as_matrix(x, cols=None):
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        # a flat list is a row when the caller expects that many columns, else a column
        a = a.reshape(1, -1) if cols is not None and a.size == cols else a.reshape(-1, 1)
    return a


def _ingest_symmetric(M):
    M = _as_matrix(M)
    if M.ndim == 2 and M.shape[0] == M.shape[1] and asymmetry(M) <= SYM_RTOL:
        return symmetrize(M)
    return M


@dataclass(frozen=True)
class ReferenceSignal:
    """Reference output trajectory ``l_t`` of one player.

    ``kind`` is ``"zero"``, ``"constant"`` or ``"sequence"``; ``values`` holds
    one vector for a constant signal and one vector per stage (stage 1 first)
    for a sequence.
    """

    kind: str = "zero"
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "sequence"):
            raise ValueError(f"unknown reference kind {self.kind!r}")
        vals = tuple(np.asarray(v, dtype=float).reshape(-1) for v in self.values)
        if self.kind == "zero" and vals:
            raise ValueError("zero reference takes no values")
        if self.kind == "constant" and len(vals) != 1:
            raise ValueError("constant reference takes exactly one vector")
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def constant(cls, value):
        return cls("constant", (value,))

    @classmethod
    def sequence(cls, values):
        return cls("sequence", tuple(values))

    @property
    def time_invariant(self) -> bool:
        return self.kind != "sequence"

    @property
    def length(self) -> float:
        return len(self.values) if self.kind == "sequence" else np.inf

    def is_zero(self) -> bool:
        return all(not np.any(v) for v in self.values)

    def at(self, t: int, p: int) -> np.ndarray:
        """Reference vector at stage ``t`` (1-based)."""
        if self.kind == "zero":
            return np.zeros(p)
        if self.kind == "constant":
            return self.values[0]
        if not 1 <= t <= len(self.values):
            raise IndexError(f"reference sequence has {len(self.values)} stages, asked for {t}")
        return self.values[t - 1]


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple = ()

    def __bool__(self):
        return self.ok


@dataclass(frozen=True, eq=False)
class GameSpec:
    """All parameters of an N-player LQ game with i/o/s dynamics.

    Matrices are coerced to float arrays on construction. Declared-symmetric
    weights (``Q[i]``, ``R[i][j]``) with relative asymmetry below 1e-9 are
    symmetrized; larger asymmetry is kept and reported by :func:`validate`.
    Construction never raises on inconsistent data, call :func:`validate`.
    """

    A: np.ndarray
    B: tuple
    C: np.ndarray
    D: tuple
    Q: tuple
    R: tuple
    delta: tuple
    ref: tuple = field(default=None)

    def __post_init__(self):
        A = _as_matrix(self.A)
        n = A.shape[0]
        B = tuple(_as_matrix(b) for b in self.B)
        C = _as_matrix(self.C, cols=n)
        D = tuple(_as_matrix(d) for d in self.D)
        Q = tuple(_ingest_symmetric(q) for q in self.Q)
        R = tuple(tuple(_ingest_symmetric(r) for r in row) for row in self.R)
        delta = tuple(float(d) for d in self.delta)
        ref = self.ref
        if ref is None:
            ref = tuple(ReferenceSignal.zero() for _ in B)
        ref = tuple(r if isinstance(r, ReferenceSignal) else ReferenceSignal.constant(r) for r in ref)
        for name, value in zip("A B C D Q R delta ref".split(), (A, B, C, D, Q, R, delta, ref)):
            object.__setattr__(self, name, value)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def N(self) -> int:
        return len(self.B)

    @property
    def m(self) -> tuple:
        return tuple(b.shape[1] for b in self.B)

    @property
    def offsets(self) -> np.ndarray:
        """Start index of each player's block in stacked input vectors."""
        return np.concatenate([[0], np.cumsum(self.m)]).astype(int)

    @property
    def B_stacked(self) -> np.ndarray:
        return np.hstack(self.B)

    @property
    def D_stacked(self) -> np.ndarray:
        return np.hstack(self.D)

    def reference(self, i: int, t: int) -> np.ndarray:
        return self.ref[i].at(t, self.p)

    def references(self, t: int) -> list:
        return [self.reference(i, t) for i in range(self.N)]

    @property
    def time_invariant_refs(self) -> bool:
        return all(r.time_invariant for r in self.ref)

    @property
    def zero_refs(self) -> bool:
        return all(r.is_zero() for r in self.ref)

    def replace(self, **changes) -> "GameSpec":
        kw = dict(A=self.A, B=self.B, C=self.C, D=self.D, Q=self.Q, R=self.R,
                  delta=self.delta, ref=self.ref)
        kw.update(changes)
        return GameSpec(**kw)

    def with_zero_refs(self) -> "GameSpec":
        return self.replace(ref=tuple(ReferenceSignal.zero() for _ in range(self.N)))


def _shape_str(M):
    return "x".join(str(s) for s in M.shape)


def validate(spec: GameSpec) -> ValidationReport:
    """Check every structural and definiteness assumption on ``spec``.

    Violations are collected, not raised; each message names the offending
    field with 1-based player indices.
    """
    v = []
    A = spec.A
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        v.append(f"A not square ({_shape_str(A)})")
        return ValidationReport(False, tuple(v))
    n, p, N = spec.n, spec.p, spec.N
    if N < 1:
        v.append("no players")
    if spec.C.shape[1] != n:
        v.append(f"C columns {spec.C.shape[1]} != n={n}")
    for name, seq in (("D", spec.D), ("Q", spec.Q), ("R", spec.R), ("delta", spec.delta), ("ref", spec.ref)):
        if len(seq) != N:
            v.append(f"{name} has {len(seq)} entries, expected N={N}")
    mats = [("A", A), ("C", spec.C)] + [(f"B[{i+1}]", b) for i, b in enumerate(spec.B)]
    mats += [(f"D[{i+1}]", d) for i, d in enumerate(spec.D)] + [(f"Q[{i+1}]", q) for i, q in enumerate(spec.Q)]
    mats += [(f"R[{i+1}][{j+1}]", r) for i, row in enumerate(spec.R) for j, r in enumerate(row)]
    bad = [name for name, M in mats if not np.all(np.isfinite(M))]
    v.extend(f"{name} has non-finite entries" for name in bad)
    if v:
        return ValidationReport(False, tuple(v))

    m = spec.m
    for i, b in enumerate(spec.B):
        if b.shape[0] != n:
            v.append(f"B[{i+1}] rows {b.shape[0]} != n={n}")
    for i, d in enumerate(spec.D):
        if d.shape != (p, m[i]):
            v.append(f"D[{i+1}] is {_shape_str(d)}, expected {p}x{m[i]}")
    for i, q in enumerate(spec.Q):
        if q.shape != (p, p):
            v.append(f"Q[{i+1}] is {_shape_str(q)}, expected {p}x{p}")
        elif asymmetry(q) > SYM_RTOL:
            v.append(f"Q[{i+1}] not symmetric")
        elif not is_psd(q):
            v.append(f"Q[{i+1}] not positive semidefinite")
    for i, row in enumerate(spec.R):
        if len(row) != N:
            v.append(f"R[{i+1}] has {len(row)} entries, expected N={N}")
            continue
        for j, r in enumerate(row):
            label = f"R[{i+1}][{j+1}]"
            if r.shape != (m[j], m[j]):
                v.append(f"{label} is {_shape_str(r)}, expected {m[j]}x{m[j]}")
            elif asymmetry(r) > SYM_RTOL:
                v.append(f"{label} not symmetric")
            elif i == j and not is_pd(r):
                v.append(f"{label} not positive definite")
    for i, d in enumerate(spec.delta):
        if not 0.0 < d <= 1.0:
            v.append(f"delta[{i+1}]={d} outside (0, 1]")
    for i, r in enumerate(spec.ref):
        if any(vec.size != p for vec in r.values):
            v.append(f"ref[{i+1}] vectors must have length p={p}")
    return ValidationReport(not v, tuple(v))


def check(spec: GameSpec) -> GameSpec:
    from .errors import InvalidSpec

    report = validate(spec)
    if not report.ok:
        raise InvalidSpec(report.violations)
    return spec


def split_blocks(stacked: np.ndarray, sizes: Sequence[int]) -> list:
    """Split row-stacked blocks ``col(X_1, ..., X_N)`` back into a list."""
    edges = np.cumsum(sizes)[:-1]
    return np.split(stacked, edges, axis=0)
