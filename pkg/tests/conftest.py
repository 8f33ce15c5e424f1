import numpy as np
import pytest

from unitary_landscapes.matgeom import haar_unitary, skew_part

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(N, rng, norm=None):
    X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    H = 0.5 * (X + X.conj().T)
    if norm is not None:
        H *= norm / np.linalg.norm(H)
    return H


def random_skew(N, rng):
    return skew_part(rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N)))


def random_matrix(N, rng):
    return rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))


def random_unitary(N, rng):
    return haar_unitary(N, rng)
