"""Random game instances for property tests and experiments."""
import numpy as np

from .errors import NumericalFailure
from .model import GameSpec, ReferenceSignal


def _psd(rng, k, scale=1.0, rank=None):
    X = rng.standard_normal((k, rank or k))
    return scale * (X @ X.T) / (rank or k)


def random_game(rng, n=3, p=2, m=(1, 1), a_norm=0.7, b_scale=0.5, d_scale=0.3,
                delta_range=(0.5, 0.95), cross_weight=0.2, refs=False) -> GameSpec:
    """A random game with ``||A||_2 = a_norm`` and moderate weights.

    Cross weights ``R[i][j]`` (``j != i``) are PSD and scaled by ``cross_weight``.
    With ``refs=True`` every player gets a random constant reference.
    """
    N = len(m)
    A = rng.standard_normal((n, n))
    A *= a_norm / np.linalg.norm(A, 2)
    B = tuple(b_scale * rng.standard_normal((n, mi)) / np.sqrt(n) for mi in m)
    C = rng.standard_normal((p, n)) / np.sqrt(n)
    D = tuple(d_scale * rng.standard_normal((p, mi)) for mi in m)
    Q = tuple(_psd(rng, p) for _ in range(N))
    R = tuple(tuple(_psd(rng, m[j]) + 0.2 * np.eye(m[j]) if i == j else _psd(rng, m[j], cross_weight)
                    for j in range(N)) for i in range(N))
    delta = tuple(rng.uniform(*delta_range) for _ in range(N))
    ref = None
    if refs:
        ref = tuple(ReferenceSignal.constant(rng.standard_normal(p)) for _ in range(N))
    return GameSpec(A, B, C, D, Q, R, delta, ref)


def random_converged_games(seed, count, **kwargs):
    """``count`` random games whose limiting equilibrium converges and is contractive.

    Yields ``(spec, sol)``; instances that fail are skipped deterministically.
    """
    from .stationary import iterate_to_limit

    rng = np.random.default_rng(seed)
    found = 0
    for _ in range(50 * count):
        spec = random_game(rng, **kwargs)
        try:
            sol = iterate_to_limit(spec)
        except (NumericalFailure, ValueError):
            continue
        yield spec, sol
        found += 1
        if found == count:
            return
    raise RuntimeError(f"only {found} of {count} random games converged")
