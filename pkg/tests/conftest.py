import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def digits_standin(n=1797, d=64, n_classes=10, seed=0):
    """Seeded synthetic stand-in with the Digits dataset's shape: class
    blobs in [0, 1]^d after /16-style scaling."""
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.0, 1.0, size=(n_classes, d))
    labels = rng.integers(0, n_classes, size=n)
    x = centers[labels] + rng.normal(0.0, 0.12, size=(n, d))
    return np.clip(x, 0.0, 1.0), labels
