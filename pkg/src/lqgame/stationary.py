"""Limiting (infinite-horizon) equilibrium of the coupled recursion.

The recursion is started from zero terminal values and iterated until the
iterates stop moving. Convergence can only be witnessed, never proven, so the
result carries the contraction history. The Nash property of the limit is
certified separately by :func:`best_response_gap`, which solves each player's
single-agent problem with its own Riccati iteration.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotConverged, UnstableLimit
from .model import GameSpec, check, spectral_norm
from .riccati import COND_MAX, _zero_terminal, riccati_residuals, stage_step

TOL = 1e-11
MAX_ITER = 10_000


@dataclass(frozen=True, eq=False)
class StationarySolution:
    Kstar: tuple
    Lstar: tuple
    Pstar: tuple
    Sstar: tuple
    wstar: tuple
    Fstar: np.ndarray
    Gstar: np.ndarray
    lam: float
    iterations: int
    converged: bool
    residuals: tuple
    history: tuple = ()

    @property
    def stable(self) -> bool:
        return self.lam < 1.0

    def max_residual(self) -> float:
        return max(max(r.values()) for r in self.residuals)

    def replace_gain(self, i: int, K) -> "StationarySolution":
        """Copy with player ``i``'s gain swapped; used for perturbation checks."""
        Ks = list(self.Kstar)
        Ks[i] = np.asarray(K, dtype=float)
        return StationarySolution(tuple(Ks), self.Lstar, self.Pstar, self.Sstar, self.wstar,
                                  self.Fstar, self.Gstar, self.lam, self.iterations,
                                  self.converged, self.residuals, self.history)


def _constant_refs(spec: GameSpec) -> list:
    if not spec.time_invariant_refs:
        raise ValueError("the limiting equilibrium needs time-invariant references")
    return spec.references(1)


def algebraic_residuals(spec: GameSpec, sol: StationarySolution) -> tuple:
    """Relative residuals of the stage equations evaluated at the fixed point.

    One dict per player with keys ``K, L, P, S, w``.
    """
    if len(sol.Kstar) != spec.N or any(k.shape != (m, spec.n) for k, m in zip(sol.Kstar, spec.m)):
        raise ValueError("solution does not match the spec dimensions")
    refs = _constant_refs(spec)
    return tuple(riccati_residuals(spec, sol.Kstar, sol.Lstar, sol.Pstar, sol.Sstar, sol.wstar,
                                   sol.Pstar, sol.Sstar, sol.wstar, refs))


def iterate_to_limit(spec: GameSpec, tol: float = TOL, max_iter: int = MAX_ITER,
                     require_stable: bool = True, cond_max: float = COND_MAX) -> StationarySolution:
    """Iterate the coupled recursion from zero until every iterate moves less than ``tol``.

    The k-th iterate is exactly the stage-1 solution of the k-stage game. The
    step is the largest Frobenius change in ``P, K, L, S`` or ``|w|`` over
    players (recorded in ``history``). For a player whose values are smaller
    than 1 in norm, changes in ``P, S, w`` are measured relative to that size,
    so small-cost players still converge to full relative accuracy.

    Raises SingularH, NotConverged, or UnstableLimit (when ``require_stable``
    and ``||F*||_2 >= 1``).
    """
    check(spec)
    refs = _constant_refs(spec)
    for i, d in enumerate(spec.delta):
        if d >= 1.0 and np.any(refs[i]):
            raise ValueError(f"player {i+1}: undiscounted nonzero reference makes w* diverge")
    P, S, w = _zero_terminal(spec)
    K = L = None
    history = []
    for k in range(1, max_iter + 1):
        st = stage_step(spec, P, S, w, refs, stage=1 - k, cond_max=cond_max)
        if K is None:
            step = scaled = np.inf
        else:
            step = scaled = 0.0
            for i in range(spec.N):
                gains = max(np.linalg.norm(st.K[i] - K[i]), np.linalg.norm(st.L[i] - L[i]))
                values = max(np.linalg.norm(st.P[i] - P[i]), np.linalg.norm(st.S[i] - S[i]),
                             abs(st.w[i] - w[i]))
                step = max(step, gains, values)
                # value changes of a player whose costs are small are judged on that player's scale
                size = max(np.linalg.norm(st.P[i]), np.linalg.norm(st.S[i]), abs(st.w[i]))
                if values > 0.0:
                    scaled = max(scaled, values / size if size < 1.0 else values)
                scaled = max(scaled, gains)
        history.append(step)
        P, S, w, K, L = st.P, st.S, st.w, st.K, st.L
        if scaled < tol:
            break
    else:
        raise NotConverged(max_iter, history[-1])
    F, G = st.assembly.F, st.assembly.G
    sol = StationarySolution(K, L, P, S, w, F, G, spectral_norm(F), k, True, (), tuple(history))
    sol = StationarySolution(K, L, P, S, w, F, G, sol.lam, k, True,
                             algebraic_residuals(spec, sol), tuple(history))
    if require_stable and not sol.stable:
        raise UnstableLimit(sol.lam)
    return sol


def discounted_lqr(A, B, Qx, Ru, Nx, delta, tol=1e-13, max_iter=200_000):
    """Discounted LQR with a state/input cross term by Riccati value iteration.

    Minimizes ``1/2 sum delta^(t-1) (x'Qx x + 2 x'Nx u + u'Ru u)`` subject to
    ``x+ = A x + B u``. Returns ``(P, K)`` with ``u = K x``.
    """
    n = A.shape[0]
    P = np.zeros((n, n))
    for _ in range(max_iter):
        BtP = delta * B.T @ P
        gain_lhs = Ru + BtP @ B
        gain_rhs = BtP @ A + Nx.T
        P_new = Qx + delta * A.T @ P @ A - gain_rhs.T @ np.linalg.solve(gain_lhs, gain_rhs)
        P_new = 0.5 * (P_new + P_new.T)
        if not np.all(np.isfinite(P_new)):
            break
        change = np.linalg.norm(P_new - P)
        P = P_new
        if change <= tol * (1.0 + np.linalg.norm(P)):
            BtP = delta * B.T @ P
            K = -np.linalg.solve(Ru + BtP @ B, BtP @ A + Nx.T)
            return P, K
    raise NotConverged(max_iter, float("nan"))


def best_response(spec: GameSpec, Kothers, i: int):
    """Player ``i``'s optimal stationary gain when the others play ``Kothers``.

    ``Kothers`` is a full list of gains; entry ``i`` is ignored.
    Returns ``(P, K)`` of the single-agent problem.
    """
    others = [j for j in range(spec.N) if j != i]
    A_cl = spec.A + sum((spec.B[j] @ Kothers[j] for j in others), np.zeros_like(spec.A))
    C_cl = spec.C + sum((spec.D[j] @ Kothers[j] for j in others), np.zeros_like(spec.C))
    Qi, Di = spec.Q[i], spec.D[i]
    Qx = C_cl.T @ Qi @ C_cl + sum((Kothers[j].T @ spec.R[i][j] @ Kothers[j] for j in others),
                                  np.zeros((spec.n, spec.n)))
    Nx = C_cl.T @ Qi @ Di
    Ru = Di.T @ Qi @ Di + spec.R[i][i]
    return discounted_lqr(A_cl, spec.B[i], Qx, Ru, Nx, spec.delta[i])


def best_response_gap(spec: GameSpec, sol: StationarySolution, i: int) -> float:
    """Spectral-norm distance between player ``i``'s best response and ``Kstar[i]``."""
    check(spec)
    if not spec.zero_refs:
        raise ValueError("best-response certification is defined for zero references")
    if not sol.stable:
        raise UnstableLimit(sol.lam)
    _, K_br = best_response(spec, sol.Kstar, i)
    return spectral_norm(K_br - sol.Kstar[i])
