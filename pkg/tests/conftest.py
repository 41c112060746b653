import numpy as np
import pytest

from slqpg import CostWeights, Gain, SystemModel
from slqpg.cli import bundled_benchmark


@pytest.fixture(scope="session")
def benchmark():
    """The bundled 2-state / 1-input benchmark problem."""
    doc = bundled_benchmark()
    model = doc.model()
    weights = doc.weights()
    k0 = Gain.verify(model, doc.k0)
    return model, weights, k0


@pytest.fixture(scope="session")
def scalar_problem():
    """dx = (-x + u) dt, q = r = sigma0 = 1: J(k) = (1 + k^2) / (2 - 2k)."""
    model = SystemModel(
        a=[[-1.0]], b=[[1.0]], c=[[0.0]], d=[[0.0]], sigma0=[[1.0]]
    )
    weights = CostWeights(q=[[1.0]], r=[[1.0]])
    return model, weights


@pytest.fixture(scope="session")
def nonconvexity_witness():
    """Two stabilizing gains whose midpoint is not mean-square stabilizing.

    With A = 0 and B = I the closed loop is K itself: K1 and K2 both have
    the double eigenvalue -1, while their midpoint [[-1, 5], [5, -1]] has
    the eigenvalue +4.
    """
    model = SystemModel(
        a=np.zeros((2, 2)),
        b=np.eye(2),
        c=np.zeros((2, 2)),
        d=np.full((2, 2), 1e-5),
        sigma0=np.eye(2),
    )
    k1 = np.array([[-1.0, 0.0], [10.0, -1.0]])
    k2 = np.array([[-1.0, 10.0], [0.0, -1.0]])
    return model, k1, k2
