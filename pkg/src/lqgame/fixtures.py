"""The two-player, three-state example game with printed equilibrium values."""
import numpy as np

from .model import GameSpec, ReferenceSignal

X1 = np.array([-0.353, -1.926, -2.595])

# limiting equilibrium and costs as printed (3 decimals)
PRINTED = {
    "K1": np.array([[-0.527, 0.217, 0.075]]),
    "L1": np.array([1.235]),
    "K2": np.array([[-0.160, -0.210, 0.306]]),
    "L2": np.array([-0.401]),
    "J1": 38.784,
    "J2": 17.050,
}


def example_game(perturb_A: float = 0.0) -> GameSpec:
    A = np.array([[0.3, 0.0, -0.2],
                  [0.2, 0.4, 0.1],
                  [-0.2, 0.3, 0.5]])
    A[0, 0] += perturb_A
    return GameSpec(
        A=A,
        B=(np.array([[0.2], [0.9], [-0.3]]), np.array([[0.5], [0.4], [0.6]])),
        C=np.array([[0.3, -0.2, 0.5],
                    [0.4, 0.1, -0.7]]),
        D=(np.array([[0.6], [0.2]]), np.array([[-0.1], [0.3]])),
        Q=(4.0 * np.eye(2), 2.0 * np.eye(2)),
        R=((np.array([[0.7]]), np.array([[0.1]])),
           (np.array([[0.2]]), np.array([[0.5]]))),
        delta=(0.9, 0.6),
        ref=(ReferenceSignal.constant([1.0, 1.0]), ReferenceSignal.constant([-1.0, -1.0])),
    )
