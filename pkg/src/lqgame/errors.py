"""Exceptions raised by the solvers.

All numerical failures derive from :class:`NumericalFailure` so the CLI can map
them onto a single exit code.
"""


class GameError(Exception):
    """Base class for every error raised by lqgame."""


class InvalidSpec(GameError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid game spec: " + "; ".join(self.violations))


class NumericalFailure(GameError):
    """A hypothesis required by the theory is not met numerically."""


class SingularH(NumericalFailure):
    def __init__(self, stage, cond):
        self.stage = stage
        self.cond = cond
        super().__init__(f"H(P_next) singular at stage {stage} (cond={cond:.3e})")


class NotConverged(NumericalFailure):
    def __init__(self, iterations, last_delta):
        self.iterations = iterations
        self.last_delta = last_delta
        super().__init__(
            f"no convergence after {iterations} iterations (last delta={last_delta:.3e})"
        )


class UnstableLimit(NumericalFailure):
    def __init__(self, lam):
        self.lam = lam
        super().__init__(f"limiting closed loop not contractive: ||F*||_2 = {lam:.6g} >= 1")


class UnstableClosedLoop(NumericalFailure):
    def __init__(self, norm, detail=""):
        self.norm = norm
        msg = f"closed loop not contractive enough: norm = {norm:.6g}"
        super().__init__(msg + (f" ({detail})" if detail else ""))


class DivergedTrajectory(NumericalFailure):
    def __init__(self, stage):
        self.stage = stage
        super().__init__(f"non-finite state at stage {stage}")


class DivergentCost(NumericalFailure):
    def __init__(self, player, stage_cost):
        self.player = player
        self.stage_cost = stage_cost
        super().__init__(
            f"player {player + 1} has undiscounted nonzero stationary cost "
            f"{stage_cost:.6g}; total cost is infinite"
        )


class Inapplicable(NumericalFailure):
    def __init__(self, rho):
        self.rho = rho
        super().__init__(f"bound inapplicable: lambda + b*eps = {rho:.6g} >= 1")
