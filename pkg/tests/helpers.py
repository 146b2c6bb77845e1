"""Shared constructors for the test suite."""
from lqgame.model import GameSpec, ReferenceSignal


def scalar_game(A=1.0, B=(1.0,), C=1.0, D=(0.0,), Q=(1.0,), R=None, delta=(1.0,), ref=None):
    """Scalar game with one state, one output and one input per player."""
    N = len(B)
    if R is None:
        R = [[1.0 if i == j else 0.0 for j in range(N)] for i in range(N)]
    if ref is not None:
        ref = tuple(ReferenceSignal.constant([r]) for r in ref)
    return GameSpec(A=[[A]], B=tuple([[b]] for b in B), C=[[C]], D=tuple([[d]] for d in D),
                    Q=tuple([[q]] for q in Q), R=tuple(tuple([[r]] for r in row) for row in R),
                    delta=delta, ref=ref)


SHAPES = [
    dict(n=3, p=2, m=(1, 1)),
    dict(n=4, p=3, m=(2, 1)),
    dict(n=2, p=2, m=(1, 1, 1)),
    dict(n=3, p=1, m=(1,)),
]


def mixed_random_games(seed, count, **kwargs):
    """Converged, contractive random games cycling through several shapes."""
    from lqgame.generators import random_converged_games

    out = []
    rng_seed = seed
    while len(out) < count:
        shape = SHAPES[len(out) % len(SHAPES)]
        out.extend(random_converged_games(rng_seed, 1, **shape, **kwargs))
        rng_seed += 1
    return out
