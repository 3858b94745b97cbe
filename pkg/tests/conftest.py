import numpy as np
import pytest

from nashsdp import BimatrixGame


@pytest.fixture
def matching_pennies() -> BimatrixGame:
    return BimatrixGame([[1.0, 0.0], [0.0, 1.0]], [[0.0, 1.0], [1.0, 0.0]])


@pytest.fixture
def prisoners_dilemma() -> BimatrixGame:
    # Normalized payoffs; defect (row/column 2) strictly dominates.
    a = [[0.6, 0.0], [1.0, 0.2]]
    b = [[0.6, 1.0], [0.0, 0.2]]
    return BimatrixGame(a, b)


@pytest.fixture
def three_equilibria() -> BimatrixGame:
    # Two pure equilibria on the diagonal plus the mixed
    # x = (2/3, 1/3), y = (1/3, 2/3).
    return BimatrixGame([[1.0, 0.0], [0.0, 0.5]], [[0.5, 0.0], [0.0, 1.0]])


def random_psd(dim: int, rng: np.random.Generator) -> np.ndarray:
    r = rng.standard_normal((dim, dim))
    return r.T @ r / dim
