"""Plain-text matrix and control-field files.

Matrix file::

    N 2
    1+0j 0+0j
    0+0j 0-1j

Field file::

    T 10.0 m 3
    0.1
    0.2
    -0.05
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DimensionError


class FormatError(ValueError):
    pass


def _content_lines(text: str) -> list[str]:
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}j"


def parse_complex(tok: str) -> complex:
    try:
        return complex(tok)
    except ValueError as exc:
        raise FormatError(f"bad matrix entry {tok!r}") from exc


def dumps_matrix(M: np.ndarray) -> str:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"matrix must be square, got {M.shape}")
    rows = [f"N {M.shape[0]}"]
    rows += [" ".join(format_complex(z) for z in row) for row in M]
    return "\n".join(rows) + "\n"


def loads_matrix(text: str) -> np.ndarray:
    lines = _content_lines(text)
    if not lines:
        raise FormatError("empty matrix file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "N":
        raise FormatError(f"expected header 'N <dim>', got {lines[0]!r}")
    try:
        N = int(head[1])
    except ValueError as exc:
        raise FormatError(f"bad dimension {head[1]!r}") from exc
    if N < 1:
        raise FormatError("dimension must be positive")
    body = lines[1:]
    if len(body) != N:
        raise FormatError(f"expected {N} rows, found {len(body)}")
    M = np.empty((N, N), dtype=complex)
    for i, ln in enumerate(body):
        toks = ln.split()
        if len(toks) != N:
            raise FormatError(f"row {i + 1}: expected {N} entries, found {len(toks)}")
        M[i] = [parse_complex(t) for t in toks]
    if not np.all(np.isfinite(M)):
        raise FormatError("matrix has non-finite entries")
    return M


def read_matrix(path: str | Path) -> np.ndarray:
    return loads_matrix(Path(path).read_text())


def write_matrix(path: str | Path, M: np.ndarray) -> None:
    Path(path).write_text(dumps_matrix(M))


def dumps_field(T: float, samples: np.ndarray) -> str:
    samples = np.asarray(samples, dtype=float)
    lines = [f"T {float(T):.17g} m {len(samples)}"]
    lines += [f"{x:.17g}" for x in samples]
    return "\n".join(lines) + "\n"


def loads_field(text: str) -> tuple[float, np.ndarray]:
    lines = _content_lines(text)
    if not lines:
        raise FormatError("empty field file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "T" or head[2] != "m":
        raise FormatError(f"expected header 'T <real> m <int>', got {lines[0]!r}")
    try:
        T = float(head[1])
        m = int(head[3])
        samples = np.array([float(x) for x in lines[1:]])
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    if len(samples) != m:
        raise FormatError(f"expected {m} samples, found {len(samples)}")
    if T <= 0 or not np.all(np.isfinite(samples)):
        raise FormatError("field must have T > 0 and finite samples")
    return T, samples


def read_field(path: str | Path) -> tuple[float, np.ndarray]:
    return loads_field(Path(path).read_text())


def write_field(path: str | Path, T: float, samples: np.ndarray) -> None:
    Path(path).write_text(dumps_field(T, samples))
