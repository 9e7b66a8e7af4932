import numpy as np
import pytest

from qubitmd import Ensemble


def random_ensemble(rng: np.random.Generator, n: int) -> Ensemble:
    """Dirichlet weights, Bloch vectors uniform in the unit ball."""
    weights = rng.dirichlet(np.ones(n))
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    v *= rng.uniform(0.0, 1.0, size=n)[:, None] ** (1.0 / 3.0)
    return Ensemble.from_lists(weights, v)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random proper rotation from a QR decomposition."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def rotate_ensemble(ensemble: Ensemble, rot: np.ndarray) -> Ensemble:
    return Ensemble.from_lists(
        ensemble.weights, [rot @ m.bloch for m in ensemble.members]
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
