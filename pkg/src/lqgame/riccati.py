"""Backward recursion for the finite-horizon feedback Nash equilibrium.

Each stage solves the coupled first-order conditions as one linear system
``H(P_next) K = g(P_next)`` for the stacked gains and, with the same matrix,
``H(P_next) L = g_tilde(S_next, l_t)`` for the stacked offsets. Value
matrices then follow from the explicit update formulas.

Offsets ``L``, linear value terms ``S`` and references are 1-D arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import SingularH
from .model import GameSpec, check, split_blocks, symmetrize

COND_MAX = 1e12


def _zero_terminal(spec: GameSpec):
    n = spec.n
    return ([np.zeros((n, n)) for _ in range(spec.N)],
            [np.zeros(n) for _ in range(spec.N)],
            [0.0] * spec.N)


def assemble_H(spec: GameSpec, P_next) -> np.ndarray:
    """Coefficient matrix of the stacked gain equations.

    Block ``(i, j)`` is ``D_i' Q_i D_j + [i == j] R_ii + delta_i B_i' P_i B_j``.
    """
    if len(P_next) != spec.N:
        raise ValueError(f"expected {spec.N} value matrices, got {len(P_next)}")
    Bs, Ds = spec.B_stacked, spec.D_stacked
    rows = []
    for i in range(spec.N):
        Pi = np.asarray(P_next[i], dtype=float)
        if Pi.shape != (spec.n, spec.n):
            raise ValueError(f"P_next[{i+1}] has shape {Pi.shape}, expected {(spec.n, spec.n)}")
        Bi, Di, Qi = spec.B[i], spec.D[i], spec.Q[i]
        rows.append(Di.T @ Qi @ Ds + spec.delta[i] * (Bi.T @ Pi @ Bs))
    H = np.vstack(rows)
    off = spec.offsets
    for i in range(spec.N):
        H[off[i]:off[i + 1], off[i]:off[i + 1]] += spec.R[i][i]
    return H


def assemble_g(spec: GameSpec, P_next) -> np.ndarray:
    """Right-hand side ``-D_i' Q_i C - delta_i B_i' P_i A``, stacked over players."""
    if len(P_next) != spec.N:
        raise ValueError(f"expected {spec.N} value matrices, got {len(P_next)}")
    blocks = []
    for i in range(spec.N):
        Pi = np.asarray(P_next[i], dtype=float)
        if Pi.shape != (spec.n, spec.n):
            raise ValueError(f"P_next[{i+1}] has shape {Pi.shape}, expected {(spec.n, spec.n)}")
        blocks.append(-spec.D[i].T @ spec.Q[i] @ spec.C - spec.delta[i] * (spec.B[i].T @ Pi @ spec.A))
    return np.vstack(blocks)


def assemble_g_tilde(spec: GameSpec, S_next, refs) -> np.ndarray:
    """Right-hand side of the stacked offset equations.

    Block ``i`` is ``D_i' Q_i l_i - delta_i B_i' S_i``. The reference enters
    with a plus sign, as follows from the offset first-order condition
    ``delta_i B_i'(P_i I + S_i) + R_ii L_i + D_i' Q_i (sum_j D_j L_j - l_i) = 0``.
    """
    if len(S_next) != spec.N or len(refs) != spec.N:
        raise ValueError(f"expected {spec.N} entries in S_next and refs")
    blocks = []
    for i in range(spec.N):
        Si = np.asarray(S_next[i], dtype=float).reshape(-1)
        li = np.asarray(refs[i], dtype=float).reshape(-1)
        if Si.size != spec.n or li.size != spec.p:
            raise ValueError(f"S_next[{i+1}] or l[{i+1}] has the wrong length")
        blocks.append(spec.D[i].T @ spec.Q[i] @ li - spec.delta[i] * (spec.B[i].T @ Si))
    return np.concatenate(blocks)


@dataclass(frozen=True, eq=False)
class StageAssembly:
    F: np.ndarray
    G: np.ndarray
    I: np.ndarray
    M: tuple
    H: np.ndarray
    g: np.ndarray
    g_tilde: np.ndarray


@dataclass(frozen=True, eq=False)
class Stage:
    K: tuple
    L: tuple
    P: tuple
    S: tuple
    w: tuple
    cond: float
    assembly: StageAssembly


def closed_loop(spec: GameSpec, K, L, refs):
    """Closed-loop matrices ``F, G``, drift ``I`` and output offsets ``M_i``."""
    F = spec.A + sum(spec.B[j] @ K[j] for j in range(spec.N))
    G = spec.C + sum(spec.D[j] @ K[j] for j in range(spec.N))
    I = sum(spec.B[j] @ L[j] for j in range(spec.N))
    DL = sum(spec.D[j] @ L[j] for j in range(spec.N))
    M = tuple(DL - np.asarray(refs[i], dtype=float) for i in range(spec.N))
    return F, G, I, M


def value_update(spec: GameSpec, i, K, L, F, G, I, M, P_next, S_next, w_next):
    """Player ``i``'s ``(P, S, w)`` at the current stage, given the gains."""
    Qi, d = spec.Q[i], spec.delta[i]
    Pn, Sn = P_next[i], S_next[i]
    KRK = sum(K[j].T @ spec.R[i][j] @ K[j] for j in range(spec.N))
    KRL = sum(K[j].T @ spec.R[i][j] @ L[j] for j in range(spec.N))
    LRL = sum(L[j] @ spec.R[i][j] @ L[j] for j in range(spec.N))
    P = G.T @ Qi @ G + d * (F.T @ Pn @ F) + KRK
    S = G.T @ Qi @ M[i] + d * (F.T @ Pn @ I) + d * (F.T @ Sn) + KRL
    w = (0.5 * (M[i] @ Qi @ M[i]) + d * 0.5 * (I @ Pn @ I) + d * (I @ Sn)
         + d * w_next[i] + 0.5 * LRL)
    return symmetrize(P), S, float(w)


def stage_step(spec: GameSpec, P_next, S_next, w_next, refs, stage=None,
               cond_max: float = COND_MAX) -> Stage:
    """One backward step of the coupled recursion.

    Raises :class:`SingularH` when ``cond(H) >= cond_max``; ``stage`` is only
    used for that message.
    """
    H = assemble_H(spec, P_next)
    g = assemble_g(spec, P_next)
    gt = assemble_g_tilde(spec, S_next, refs)
    cond = float(np.linalg.cond(H))
    if not np.isfinite(cond) or cond >= cond_max:
        raise SingularH(stage, cond)
    lu = sla.lu_factor(H)
    Kall = sla.lu_solve(lu, g)
    Lall = sla.lu_solve(lu, gt)
    K = tuple(split_blocks(Kall, spec.m))
    L = tuple(split_blocks(Lall, spec.m))
    F, G, I, M = closed_loop(spec, K, L, refs)
    P, S, w = zip(*(value_update(spec, i, K, L, F, G, I, M, P_next, S_next, w_next)
                    for i in range(spec.N)))
    return Stage(K, L, P, S, w, cond, StageAssembly(F, G, I, M, H, g, gt))


@dataclass(frozen=True, eq=False)
class FiniteHorizonSolution:
    """Equilibrium matrices of a ``T``-stage game.

    ``K[t-1][i]`` is player ``i``'s gain at stage ``t``; ``P``, ``S`` and
    ``w`` have ``T + 1`` entries, the last one being the zero terminal value.
    """

    T: int
    K: tuple
    L: tuple
    P: tuple
    S: tuple
    w: tuple
    cond: tuple

    def gains(self, t: int) -> tuple:
        return self.K[t - 1]

    def offsets(self, t: int) -> tuple:
        return self.L[t - 1]


def backward_solve(spec: GameSpec, T: int, cond_max: float = COND_MAX) -> FiniteHorizonSolution:
    """Unique feedback Nash equilibrium of the ``T``-stage game.

    Stages run from ``T`` down to 1 with zero terminal values. References are
    indexed by absolute stage. Completing the loop certifies that the
    equilibrium exists and is unique.
    """
    check(spec)
    if int(T) != T or T < 1:
        raise ValueError(f"horizon must be a positive integer, got {T}")
    T = int(T)
    for i, r in enumerate(spec.ref):
        if r.length < T:
            raise ValueError(f"ref[{i+1}] has {r.length} stages, horizon is {T}")
    P, S, w = _zero_terminal(spec)
    Ks, Ls, Ps, Ss, ws, conds = [], [], [tuple(P)], [tuple(S)], [tuple(w)], []
    for t in range(T, 0, -1):
        st = stage_step(spec, P, S, w, spec.references(t), stage=t, cond_max=cond_max)
        P, S, w = st.P, st.S, st.w
        Ks.append(st.K)
        Ls.append(st.L)
        Ps.append(st.P)
        Ss.append(st.S)
        ws.append(st.w)
        conds.append(st.cond)
    return FiniteHorizonSolution(T, tuple(Ks[::-1]), tuple(Ls[::-1]), tuple(Ps[::-1]),
                                 tuple(Ss[::-1]), tuple(ws[::-1]), tuple(conds[::-1]))


def value_at(sol: FiniteHorizonSolution, t: int, i: int, x) -> float:
    """Continuation value ``1/2 x'P x + S'x + w`` of player ``i`` from stage ``t``."""
    if not 1 <= t <= sol.T + 1:
        raise IndexError(f"stage {t} outside 1..{sol.T + 1}")
    if not 0 <= i < len(sol.P[0]):
        raise IndexError(f"player index {i} out of range")
    x = np.asarray(x, dtype=float)
    return float(0.5 * x @ sol.P[t - 1][i] @ x + sol.S[t - 1][i] @ x + sol.w[t - 1][i])


def _rel(res, *terms):
    scale = max([float(np.linalg.norm(np.atleast_1d(t))) for t in terms] + [0.0])
    return float(np.linalg.norm(np.atleast_1d(res)) / (1.0 + scale))


def riccati_residuals(spec: GameSpec, K, L, P, S, w, P_next, S_next, w_next, refs) -> list:
    """Relative residuals of the five stage equations for each player.

    Returns one dict per player with keys ``K, L, P, S, w``; each value is
    ``||residual|| / (1 + largest term norm)``.
    """
    F, G, I, M = closed_loop(spec, K, L, refs)
    out = []
    for i in range(spec.N):
        Bi, Di, Qi, d = spec.B[i], spec.D[i], spec.Q[i], spec.delta[i]
        Pn, Sn = P_next[i], S_next[i]
        k_terms = (d * Bi.T @ Pn @ F, Di.T @ Qi @ G, spec.R[i][i] @ K[i])
        l_terms = (d * Bi.T @ (Pn @ I + Sn), spec.R[i][i] @ L[i], Di.T @ Qi @ M[i])
        p_terms = (G.T @ Qi @ G, d * F.T @ Pn @ F,
                   sum(K[j].T @ spec.R[i][j] @ K[j] for j in range(spec.N)))
        s_terms = (G.T @ Qi @ M[i], d * F.T @ Pn @ I, d * F.T @ Sn,
                   sum(K[j].T @ spec.R[i][j] @ L[j] for j in range(spec.N)))
        w_terms = (0.5 * M[i] @ Qi @ M[i], 0.5 * d * I @ Pn @ I, d * I @ Sn, d * w_next[i],
                   0.5 * sum(L[j] @ spec.R[i][j] @ L[j] for j in range(spec.N)))
        out.append({
            "K": _rel(sum(k_terms), *k_terms),
            "L": _rel(sum(l_terms), *l_terms),
            "P": _rel(P[i] - sum(p_terms), P[i], *p_terms),
            "S": _rel(S[i] - sum(s_terms), S[i], *s_terms),
            "w": _rel(w[i] - sum(w_terms), w[i], *w_terms),
        })
    return out


def solution_residuals(spec: GameSpec, sol: FiniteHorizonSolution) -> float:
    """Largest relative residual of the stage equations over all stages and players."""
    worst = 0.0
    for t in range(1, sol.T + 1):
        res = riccati_residuals(spec, sol.K[t - 1], sol.L[t - 1], sol.P[t - 1], sol.S[t - 1],
                                sol.w[t - 1], sol.P[t], sol.S[t], sol.w[t], spec.references(t))
        worst = max(worst, max(max(r.values()) for r in res))
    return worst
