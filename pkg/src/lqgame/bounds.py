"""Certified upper bound on the receding-horizon cost gap.

For zero references and a contractive limiting closed loop, every player's
gap between the receding-horizon cost and the limiting-equilibrium cost is at
most ``1/2 ||x1||^2 theta_i(eps) / (1 - delta_i)`` where ``eps`` is the
largest spectral distance between a player's receding-horizon gain and its
limiting gain. All norms are spectral norms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import Inapplicable
from .model import GameSpec, check, spectral_norm
from .simulate import make_receding_strategy
from .stationary import StationarySolution

RHO_MAX = 1.0 - 1e-12
SCAN_CAP = 1_000_000


def _M_term(t: int, rho: float) -> float:
    if t == 1:
        return 0.0
    if t == 2:
        return 1.0
    return (t - 1) * rho ** (t - 2)


def compute_M(lam: float, b: float, eps: float) -> float:
    """``max over t >= 1 of (t - 1) * (lam + b*eps)**(t - 2)``.

    The sequence rises from 0 at ``t = 1`` to 1 at ``t = 2`` and is unimodal
    afterwards, so the scan stops after two consecutive decreases.
    """
    if min(lam, b, eps) < 0:
        raise ValueError("lam, b and eps must be nonnegative")
    rho = lam + b * eps
    if rho >= RHO_MAX:
        raise Inapplicable(rho)
    if rho == 0.0:
        return 1.0
    best, prev, drops = 1.0, 1.0, 0
    for t in range(3, SCAN_CAP + 1):
        val = _M_term(t, rho)
        best = max(best, val)
        drops = drops + 1 if val < prev else 0
        if drops == 2:
            return best
        prev = val
    # peak lies past the scan cap: the integer maximizer brackets 2 - 1/ln(rho)
    t_star = 2.0 - 1.0 / math.log(rho)
    lo = max(2, math.floor(t_star))
    return max(best, *(math.exp(math.log(t - 1) + (t - 2) * math.log(rho)) for t in (lo, lo + 1)))


@dataclass(frozen=True)
class BoundConstants:
    """Everything in the bound that does not depend on the horizons."""

    b: float
    d: float
    lam: float
    G_norm: float
    Q_norms: tuple
    R_norms: tuple
    K_norms: tuple
    delta: tuple

    def terms(self, eps: float, M: float, i: int):
        """``(g(eps), G_i1(eps), G_i2(eps))`` for a given factor ``M``."""
        g = (self.G_norm + self.d * eps) * M * self.b * eps + self.d * eps
        G1 = 2.0 * g * self.Q_norms[i] * (self.G_norm + self.d * eps)
        G2 = 0.0
        for r, k in zip(self.R_norms[i], self.K_norms):
            G2 += eps * eps * r * (k * self.b * M + 1.0)
            G2 += 2.0 * eps * r * k * (k * self.b * M + 1.0)
        return g, G1, G2


def bound_constants(spec: GameSpec, sol: StationarySolution) -> BoundConstants:
    return BoundConstants(
        b=sum(spectral_norm(B) for B in spec.B),
        d=sum(spectral_norm(D) for D in spec.D),
        lam=spectral_norm(sol.Fstar),
        G_norm=spectral_norm(sol.Gstar),
        Q_norms=tuple(spectral_norm(Q) for Q in spec.Q),
        R_norms=tuple(tuple(spectral_norm(R) for R in row) for row in spec.R),
        K_norms=tuple(spectral_norm(K) for K in sol.Kstar),
        delta=tuple(spec.delta),
    )


@dataclass(frozen=True)
class BoundReport:
    horizons: tuple
    epsilon: float
    b: float
    d: float
    lam: float
    M: float
    g_eps: float
    G_i1: tuple
    G_i2: tuple
    theta: tuple
    bound: tuple
    applicable: bool

    @property
    def T_h(self) -> int:
        return min(self.horizons)


def report_for_epsilon(consts: BoundConstants, eps: float, x1, horizons=(), strict=True) -> BoundReport:
    """Evaluate the whole constant chain at a given ``eps``."""
    x1 = np.asarray(x1, dtype=float).reshape(-1)
    N = len(consts.delta)
    try:
        M = compute_M(consts.lam, consts.b, eps)
    except Inapplicable:
        if strict:
            raise
        inf = (math.inf,) * N
        return BoundReport(tuple(horizons), eps, consts.b, consts.d, consts.lam, math.inf,
                           math.inf, inf, inf, inf, inf, False)
    G1s, G2s, thetas, bounds = [], [], [], []
    g = 0.0
    for i in range(N):
        g, G1, G2 = consts.terms(eps, M, i)
        theta = G1 + G2
        d = consts.delta[i]
        bound = 0.5 * float(x1 @ x1) * theta / (1.0 - d) if d < 1.0 else math.inf
        if d >= 1.0 and theta == 0.0:
            bound = 0.0
        G1s.append(G1)
        G2s.append(G2)
        thetas.append(theta)
        bounds.append(bound)
    applicable = all(d < 1.0 for d in consts.delta)
    return BoundReport(tuple(horizons), eps, consts.b, consts.d, consts.lam, M, g,
                       tuple(G1s), tuple(G2s), tuple(thetas), tuple(bounds), applicable)


def gap_bound(spec: GameSpec, sol: StationarySolution, horizons, x1, strict: bool = True) -> BoundReport:
    """Certified bound on ``|J_tilde_i - J_i|`` for the given receding horizons.

    With ``strict=False`` an inapplicable bound (``lam + b*eps >= 1``) is
    returned as a report with ``applicable=False`` and infinite constants
    instead of raising :class:`Inapplicable`.
    """
    check(spec)
    if not spec.zero_refs:
        raise ValueError("the cost-gap bound covers zero references only")
    if not sol.stable:
        raise ValueError(f"limiting closed loop not contractive (||F*||_2 = {sol.lam:.6g})")
    x1 = np.asarray(x1, dtype=float).reshape(-1)
    if x1.size != spec.n:
        raise ValueError(f"x1 has length {x1.size}, expected n={spec.n}")
    profile = make_receding_strategy(spec, horizons)
    eps = max(spectral_norm(K - Ks) for K, Ks in zip(profile.gains, sol.Kstar))
    return report_for_epsilon(bound_constants(spec, sol), eps, x1, profile.horizons, strict)
