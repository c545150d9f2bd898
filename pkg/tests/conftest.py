"""Shared generators for randomized property tests.

Everything is seeded through numpy Generators passed in by the tests, so
reruns are reproducible.
"""

import numpy as np
import pytest

from wass1d.measures import DiscreteMeasure


def random_measure(
    rng: np.random.Generator,
    max_atoms: int = 8,
    lo: float = -1.0,
    hi: float = 1.0,
) -> DiscreteMeasure:
    """Random measure with atoms strictly inside (lo, hi] and Dirichlet weights."""
    n = int(rng.integers(1, max_atoms + 1))
    span = hi - lo
    atoms = lo + span * (1.0 - rng.random(n))  # in (lo, hi]
    weights = rng.dirichlet(np.ones(n))
    return DiscreteMeasure(atoms, weights)


def equal_weight_pair(rng: np.random.Generator, n: int, scale: float = 2.0):
    """Two equal-size samples of distinct continuous draws."""
    x = np.sort(rng.standard_normal(n) * scale)
    y = np.sort(rng.standard_normal(n) * scale)
    return x, y


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
