"""Horizon sweeps: receding-horizon gains, costs, gaps and bounds as T grows."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import bound_constants, report_for_epsilon
from .model import GameSpec, spectral_norm
from .riccati import backward_solve
from .simulate import AffineStrategyProfile, profile_cost, stationary_profile
from .stationary import StationarySolution, iterate_to_limit


@dataclass(frozen=True, eq=False)
class SweepRow:
    T: int
    gains: tuple
    offsets: tuple
    J_tilde: np.ndarray
    J: np.ndarray
    gap: np.ndarray
    bound: tuple | None


def first_stage_path(spec: GameSpec, T_values):
    """``(K_1(T), L_1(T))`` for each ``T``, all read from a single backward solve."""
    T_values = [int(T) for T in T_values]
    if not T_values or min(T_values) < 1:
        raise ValueError("horizons must be >= 1")
    Tmax = max(T_values)
    sol = backward_solve(spec, Tmax)
    return {T: (sol.K[Tmax - T], sol.L[Tmax - T]) for T in T_values}


def horizon_sweep(spec: GameSpec, T_values, x1, sol: StationarySolution | None = None,
                  with_bound: bool = True) -> list:
    """Common-horizon receding strategies ``T = T_values`` against the limiting equilibrium.

    Bounds are filled in only for zero-reference games; rows are ordered by T.
    """
    if sol is None:
        sol = iterate_to_limit(spec)
    x1 = np.asarray(x1, dtype=float).reshape(-1)
    J = profile_cost(spec, stationary_profile(sol), x1)
    consts = bound_constants(spec, sol) if with_bound and spec.zero_refs else None
    path = first_stage_path(spec, T_values)
    rows = []
    for T in sorted(path):
        K, L = path[T]
        profile = AffineStrategyProfile(K, L, "receding", (T,) * spec.N)
        Jt = profile_cost(spec, profile, x1)
        bound = None
        if consts is not None:
            eps = max(spectral_norm(k - ks) for k, ks in zip(K, sol.Kstar))
            rep = report_for_epsilon(consts, eps, x1, profile.horizons, strict=False)
            bound = rep.bound if rep.applicable else None
        rows.append(SweepRow(T, K, L, Jt, J, np.abs(Jt - J), bound))
    return rows
