"""Named target gates and Pauli matrices."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError
from .matgeom import haar_unitary

PAULI = {
    "sigma_x": np.array([[0, 1], [1, 0]], dtype=complex),
    "sigma_y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "sigma_z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def hadamard() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)


def cnot() -> np.ndarray:
    U = np.eye(4, dtype=complex)
    U[2:, 2:] = [[0, 1], [1, 0]]
    return U


def qft(N: int) -> np.ndarray:
    j = np.arange(N)
    return np.exp(2j * np.pi * np.outer(j, j) / N) / np.sqrt(N)


def named_gate(name: str, N: int | None = None, rng: np.random.Generator | None = None) -> np.ndarray:
    """Look up ``hadamard``, ``cnot``, ``qft``, ``identity`` or ``random`` (Haar, needs ``rng``)."""
    fixed = {"hadamard": 2, "cnot": 4}
    if name in fixed:
        if N is not None and N != fixed[name]:
            raise DimensionError(f"{name} acts on dimension {fixed[name]}, not {N}")
        return hadamard() if name == "hadamard" else cnot()
    if N is None:
        raise DimensionError(f"gate {name!r} needs a dimension")
    if name == "qft":
        return qft(N)
    if name == "identity":
        return np.eye(N, dtype=complex)
    if name == "random":
        if rng is None:
            raise ValueError("random gate needs a generator")
        return haar_unitary(N, rng)
    raise KeyError(f"unknown gate {name!r}")
