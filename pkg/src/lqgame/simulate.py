"""Closed-loop rollouts under affine strategy profiles and their discounted costs.

The receding-horizon profile has every player ``i`` look ``T[i]`` stages
ahead and apply only the first-stage equilibrium action. Because the
stage-1 matrices of a ``T``-stage game never depend on the realized state,
the profile is a fixed affine feedback and is computed once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergedTrajectory, DivergentCost, UnstableClosedLoop
from .model import GameSpec, check, spectral_norm
from .riccati import backward_solve
from .stationary import StationarySolution, iterate_to_limit

TAIL_TOL = 1e-8
MAX_STEPS = 1_000_000


@dataclass(frozen=True, eq=False)
class AffineStrategyProfile:
    """``u_i = gains[i] @ x + offsets[i]`` for every player, at every stage.

    ``kind`` is ``"receding"``, ``"stationary"`` or ``"custom"``; ``horizons``
    is set for receding-horizon profiles.
    """

    gains: tuple
    offsets: tuple
    kind: str = "custom"
    horizons: tuple | None = None

    def __post_init__(self):
        gains = tuple(np.atleast_2d(np.asarray(k, dtype=float)) for k in self.gains)
        offsets = tuple(np.asarray(l, dtype=float).reshape(-1) for l in self.offsets)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "offsets", offsets)

    @property
    def T_h(self):
        return min(self.horizons) if self.horizons else None

    def check_against(self, spec: GameSpec):
        if len(self.gains) != spec.N or len(self.offsets) != spec.N:
            raise ValueError(f"profile has {len(self.gains)} players, spec has {spec.N}")
        for i, (k, l, m) in enumerate(zip(self.gains, self.offsets, spec.m)):
            if k.shape != (m, spec.n) or l.shape != (m,):
                raise ValueError(f"player {i+1}: gain {k.shape} / offset {l.shape} do not fit m={m}, n={spec.n}")

    def closed_loop(self, spec: GameSpec):
        """``F, I, G, c`` with ``x+ = F x + I`` and ``y = G x + c``."""
        F = spec.A + sum(spec.B[j] @ self.gains[j] for j in range(spec.N))
        I = sum(spec.B[j] @ self.offsets[j] for j in range(spec.N))
        G = spec.C + sum(spec.D[j] @ self.gains[j] for j in range(spec.N))
        c = sum(spec.D[j] @ self.offsets[j] for j in range(spec.N))
        return F, I, G, c


def stationary_profile(sol: StationarySolution) -> AffineStrategyProfile:
    return AffineStrategyProfile(sol.Kstar, sol.Lstar, "stationary")


def make_receding_strategy(spec: GameSpec, horizons) -> AffineStrategyProfile:
    """First-stage equilibrium matrices of each player's own ``T[i]``-stage game.

    One solve with the longest horizon serves every player: the stage-1
    matrices of the ``T[i]``-stage game sit at stage ``max(T) - T[i] + 1`` of it.
    """
    check(spec)
    horizons = tuple(int(T) for T in horizons)
    if len(horizons) != spec.N:
        raise ValueError(f"need {spec.N} horizons, got {len(horizons)}")
    if min(horizons) < 1:
        raise ValueError("horizons must be >= 1")
    if not spec.time_invariant_refs:
        raise ValueError("receding-horizon profiles need time-invariant references")
    Tmax = max(horizons)
    sol = backward_solve(spec, Tmax)
    gains = tuple(sol.K[Tmax - T][i] for i, T in enumerate(horizons))
    offsets = tuple(sol.L[Tmax - T][i] for i, T in enumerate(horizons))
    return AffineStrategyProfile(gains, offsets, "receding", horizons)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Simulated stages ``1..tau``.

    ``stage_costs[t-1, i]`` already carries the discount ``delta_i**(t-1)``;
    ``tail_bounds[i]`` bounds the absolute discarded cost of stages past ``tau``.
    """

    states: np.ndarray
    outputs: np.ndarray
    inputs: tuple
    stage_costs: np.ndarray
    totals: np.ndarray
    tail_bounds: np.ndarray

    @property
    def tau(self) -> int:
        return self.states.shape[0]


class _TailBound:
    """Geometric bound on the remaining cost after a given stage.

    With ``e = x - x_inf`` and ``||F||_2 = rho < 1`` each stage cost obeys
    ``|c(x)| <= |c_inf| + ||a|| ||e|| + 1/2 ||W|| ||e||^2`` and ``||e||``
    shrinks at least by ``rho`` per stage.
    """

    def __init__(self, spec, profile, refs):
        F, I, G, c = profile.closed_loop(spec)
        self.rho = spectral_norm(F)
        n = spec.n
        self.x_inf = np.linalg.solve(np.eye(n) - F, I)
        y_inf = G @ self.x_inf + c
        u_inf = [k @ self.x_inf + l for k, l in zip(profile.gains, profile.offsets)]
        self.c_inf, self.a, self.W = [], [], []
        for i in range(spec.N):
            e = y_inf - refs[i]
            Qi = spec.Q[i]
            R = spec.R[i]
            c_inf = 0.5 * (e @ Qi @ e + sum(u @ R[j] @ u for j, u in enumerate(u_inf)))
            a = G.T @ Qi @ e + sum(k.T @ R[j] @ u for j, (k, u) in enumerate(zip(profile.gains, u_inf)))
            W = G.T @ Qi @ G + sum(k.T @ R[j] @ k for j, k in enumerate(profile.gains))
            scale = abs(e @ Qi @ e) + sum(abs(u @ R[j] @ u) for j, u in enumerate(u_inf))
            if abs(c_inf) <= 1e-14 * (1.0 + scale):
                c_inf = 0.0
            if spec.delta[i] >= 1.0 and c_inf != 0.0:
                raise DivergentCost(i, c_inf)
            self.c_inf.append(abs(c_inf))
            self.a.append(np.linalg.norm(a))
            self.W.append(spectral_norm(W))
        self.delta = spec.delta

    def after(self, t, x_next):
        """Bounds on ``sum_{s > t}`` of the discounted stage costs, per player."""
        E = float(np.linalg.norm(x_next - self.x_inf))
        r = self.rho
        out = np.empty(len(self.delta))
        for i, d in enumerate(self.delta):
            b = self.a[i] * E / (1.0 - d * r) + 0.5 * self.W[i] * E * E / (1.0 - d * r * r)
            if self.c_inf[i]:
                b += self.c_inf[i] / (1.0 - d)
            out[i] = d ** t * b
        return out


def rollout(spec: GameSpec, profile: AffineStrategyProfile, x1, steps: int | None = None,
            tail_tol: float | None = None, max_steps: int = MAX_STEPS) -> Trajectory:
    """Simulate ``u_t = K x_t + L`` and accumulate each player's discounted cost.

    Exactly one of ``steps`` (fixed length) and ``tail_tol`` (stop once every
    player's tail bound is below it) should be given; with neither, ``tail_tol``
    defaults to 1e-8.
    """
    check(spec)
    profile.check_against(spec)
    x = np.asarray(x1, dtype=float).reshape(-1)
    if x.size != spec.n:
        raise ValueError(f"x1 has length {x.size}, expected n={spec.n}")
    if steps is not None and tail_tol is not None:
        raise ValueError("give either steps or tail_tol, not both")
    if steps is None and tail_tol is None:
        tail_tol = TAIL_TOL
    if steps is not None and steps < 1:
        raise ValueError("steps must be >= 1")

    tail = None
    if spec.time_invariant_refs:
        F, _, _, _ = profile.closed_loop(spec)
        rho = spectral_norm(F)
        if rho < 1.0:
            try:
                tail = _TailBound(spec, profile, spec.references(1))
            except DivergentCost:
                if tail_tol is not None:
                    raise
        elif tail_tol is not None:
            raise UnstableClosedLoop(rho, "tail_tol mode needs ||F||_2 < 1")
    elif tail_tol is not None:
        raise ValueError("tail_tol mode needs time-invariant references")

    limit = steps if steps is not None else max_steps
    N = spec.N
    states, outputs, costs = [], [], []
    inputs = [[] for _ in range(N)]
    bounds = np.full(N, np.inf)
    weights = np.ones(N)
    delta = np.asarray(spec.delta)
    for t in range(1, limit + 1):
        u = [k @ x + l for k, l in zip(profile.gains, profile.offsets)]
        y = spec.C @ x + sum(spec.D[j] @ u[j] for j in range(N))
        c = np.empty(N)
        for i in range(N):
            e = y - spec.reference(i, t)
            c[i] = 0.5 * (e @ spec.Q[i] @ e + sum(u[j] @ spec.R[i][j] @ u[j] for j in range(N)))
        states.append(x)
        outputs.append(y)
        for j in range(N):
            inputs[j].append(u[j])
        costs.append(c * weights)
        weights = weights * delta
        x = spec.A @ x + sum(spec.B[j] @ u[j] for j in range(N))
        if not np.all(np.isfinite(x)):
            raise DivergedTrajectory(t + 1)
        if tail is not None and (tail_tol is not None or t == limit):
            bounds = tail.after(t, x)
            if tail_tol is not None and np.all(bounds < tail_tol):
                break
    else:
        if tail_tol is not None:
            raise UnstableClosedLoop(tail.rho, f"tail bound still {bounds.max():.3e} after {limit} steps")
    costs = np.array(costs)
    return Trajectory(np.array(states), np.array(outputs),
                      tuple(np.array(v).reshape(len(states), -1) for v in inputs),
                      costs, costs.sum(axis=0), bounds)


def _discounted_lyapunov(F, W, delta, rtol=1e-15):
    """Sum of ``delta^k (F')^k W F^k`` by repeated squaring."""
    A = np.sqrt(delta) * F
    X = np.array(W, dtype=float)
    for _ in range(64):
        inc = A.T @ X @ A
        X = X + inc
        if np.linalg.norm(inc) <= rtol * (1.0 + np.linalg.norm(X)):
            break
        A = A @ A
    return 0.5 * (X + X.T)


def cost_matrix(spec: GameSpec, profile: AffineStrategyProfile, i: int) -> np.ndarray:
    """``Pi`` with player ``i``'s infinite discounted cost equal to ``1/2 x1' Pi x1``.

    Only meaningful for zero references and zero offsets.
    """
    F, _, G, _ = profile.closed_loop(spec)
    rho = spectral_norm(F)
    if rho * rho * spec.delta[i] >= 1.0:
        raise UnstableClosedLoop(rho, f"delta[{i+1}] * ||F||^2 >= 1")
    W = G.T @ spec.Q[i] @ G + sum(k.T @ spec.R[i][j] @ k for j, k in enumerate(profile.gains))
    return _discounted_lyapunov(F, W, spec.delta[i])


def closed_form_cost(spec: GameSpec, profile: AffineStrategyProfile, x1) -> np.ndarray:
    """Each player's infinite-horizon discounted cost from ``x1``, without simulating."""
    check(spec)
    profile.check_against(spec)
    if not spec.zero_refs:
        raise ValueError("closed_form_cost needs zero references")
    if any(np.any(l) for l in profile.offsets):
        raise ValueError("closed_form_cost needs zero offsets")
    x1 = np.asarray(x1, dtype=float).reshape(-1)
    return np.array([0.5 * x1 @ cost_matrix(spec, profile, i) @ x1 for i in range(spec.N)])


@dataclass(frozen=True)
class CostGap:
    J_tilde: float
    J: float
    gap: float


def profile_cost(spec: GameSpec, profile: AffineStrategyProfile, x1, tail_tol=TAIL_TOL) -> np.ndarray:
    """Closed form for zero references, a tail-bounded rollout otherwise."""
    if spec.zero_refs and not any(np.any(l) for l in profile.offsets):
        return closed_form_cost(spec, profile, x1)
    return rollout(spec, profile, x1, tail_tol=tail_tol).totals


def cost_gap(spec: GameSpec, horizons, x1, sol: StationarySolution | None = None,
             tail_tol=TAIL_TOL) -> list:
    """Receding-horizon cost, limiting-equilibrium cost and their gap per player."""
    if sol is None:
        sol = iterate_to_limit(spec)
    J = profile_cost(spec, stationary_profile(sol), x1, tail_tol)
    Jt = profile_cost(spec, make_receding_strategy(spec, horizons), x1, tail_tol)
    return [CostGap(float(a), float(b), float(abs(a - b))) for a, b in zip(Jt, J)]
