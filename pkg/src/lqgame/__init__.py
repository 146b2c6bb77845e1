"""Feedback Nash equilibria of discrete-time LQ games with input/output/state dynamics.

Finite-horizon equilibria by coupled Riccati backward recursion, the limiting
infinite-horizon equilibrium, receding-horizon ("look T ahead, move one")
strategies and a certified bound on their cost gap.
"""
from .bounds import BoundReport, compute_M, gap_bound
from .errors import (DivergedTrajectory, DivergentCost, GameError, Inapplicable, InvalidSpec,
                     NotConverged, NumericalFailure, SingularH, UnstableClosedLoop, UnstableLimit)
from .fixtures import example_game
from .model import GameSpec, ReferenceSignal, ValidationReport, spectral_norm, validate
from .riccati import (FiniteHorizonSolution, assemble_g, assemble_g_tilde, assemble_H, backward_solve,
                      stage_step, value_at)
from .simulate import (AffineStrategyProfile, Trajectory, closed_form_cost, cost_gap,
                       make_receding_strategy, rollout, stationary_profile)
from .stationary import StationarySolution, algebraic_residuals, best_response_gap, iterate_to_limit

__all__ = [
    "AffineStrategyProfile", "BoundReport", "DivergedTrajectory", "DivergentCost",
    "FiniteHorizonSolution", "GameError", "GameSpec", "Inapplicable", "InvalidSpec", "NotConverged",
    "NumericalFailure", "ReferenceSignal", "SingularH", "StationarySolution", "Trajectory",
    "UnstableClosedLoop", "UnstableLimit", "ValidationReport", "algebraic_residuals", "assemble_H",
    "assemble_g", "assemble_g_tilde", "backward_solve", "best_response_gap", "closed_form_cost",
    "compute_M", "cost_gap", "example_game", "gap_bound", "iterate_to_limit", "make_receding_strategy", "rollout",
    "spectral_norm", "stage_step", "stationary_profile", "validate", "value_at",
]
