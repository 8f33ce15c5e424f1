"""Geometry of the unitary group U(N).

Points of U(N) and tangent vectors are plain complex ``ndarray`` objects.
The metric everywhere is the real Hilbert-Schmidt inner product
``<X, Y> = Re Tr(X^dag Y)``, under which the tangent space at ``U`` is
``{U Y : Y skew-Hermitian}``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import schur

from .errors import CutLocusWarning, DimensionError, NotTangentError, NotUnitaryError

EPS_UNITARY = 1e-10
TAU_CUT = 1e-8
TAU_CLUSTER = 1e-8


def dag(M: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(M, -1, -2))


def inner(X: np.ndarray, Y: np.ndarray) -> float:
    """Real Hilbert-Schmidt inner product Re Tr(X^dag Y)."""
    return float(np.real(np.vdot(X, Y)))


def hs_norm(X: np.ndarray) -> float:
    return float(np.linalg.norm(X))


def _square(M: np.ndarray, name: str = "matrix") -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    return M


def _same_shape(A: np.ndarray, B: np.ndarray) -> None:
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch: {A.shape} vs {B.shape}")


def unitarity_residual(U: np.ndarray) -> float:
    U = _square(U)
    return hs_norm(dag(U) @ U - np.eye(U.shape[0]))


def check_unitary(U: np.ndarray, tol: float = EPS_UNITARY) -> np.ndarray:
    """Return ``U`` as a complex array, raising if it is not unitary within ``tol``."""
    U = np.asarray(_square(U, "U"), dtype=complex)
    res = unitarity_residual(U)
    if res > tol:
        raise NotUnitaryError(f"||U^dag U - I|| = {res:.3e} exceeds {tol:.1e}")
    return U


def reunitarize(U: np.ndarray, tol: float = EPS_UNITARY) -> np.ndarray:
    """Polar projection U (U^dag U)^(-1/2), applied only when the residual exceeds ``tol``."""
    if unitarity_residual(U) <= tol:
        return U
    P, _, Qh = np.linalg.svd(U)
    return P @ Qh


def skew_part(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M - dag(M))


def herm_part(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + dag(M))


def project_to_tangent(U: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Orthogonal projection of an arbitrary matrix onto T_U U(N): (M - U M^dag U)/2."""
    U = _square(U, "U")
    M = np.asarray(M, dtype=complex)
    _same_shape(U, M)
    return 0.5 * (M - U @ dag(M) @ U)


def tangent_residual(U: np.ndarray, dU: np.ndarray) -> float:
    """Norm of the Hermitian part of U^dag dU (zero for tangent vectors)."""
    _same_shape(U, dU)
    return hs_norm(herm_part(dag(U) @ dU))


def check_tangent(U: np.ndarray, dU: np.ndarray, tol: float = EPS_UNITARY) -> np.ndarray:
    # relative to |dU| so that large gradients are not rejected for roundoff
    dU = np.asarray(dU, dtype=complex)
    res = tangent_residual(U, dU)
    if res > tol * max(1.0, hs_norm(dU)):
        raise NotTangentError(f"tangency residual {res:.3e} exceeds {tol:.1e}")
    return dU


@lru_cache(maxsize=32)
def _skew_basis_cached(N: int) -> tuple[np.ndarray, ...]:
    out = []
    for p in range(N):
        E = np.zeros((N, N), dtype=complex)
        E[p, p] = 1j
        out.append(E)
    s = 1.0 / np.sqrt(2.0)
    for p in range(N):
        for q in range(p + 1, N):
            E = np.zeros((N, N), dtype=complex)
            E[p, q] = E[q, p] = 1j * s
            out.append(E)
            E = np.zeros((N, N), dtype=complex)
            E[p, q] = s
            E[q, p] = -s
            out.append(E)
    for E in out:
        E.setflags(write=False)
    return tuple(out)


def skew_basis(N: int) -> list[np.ndarray]:
    """Orthonormal real basis of u(N): i|p><p|, (i/sqrt2)(|p><q|+|q><p|), (1/sqrt2)(|p><q|-|q><p|)."""
    return list(_skew_basis_cached(int(N)))


def tangent_coords(U: np.ndarray, dU: np.ndarray) -> np.ndarray:
    """Coordinates of ``dU`` in the orthonormal frame {U Y_a} of T_U U(N)."""
    Y = dag(U) @ dU
    return np.array([inner(E, Y) for E in skew_basis(U.shape[0])])


def from_coords(U: np.ndarray, c: np.ndarray) -> np.ndarray:
    basis = skew_basis(U.shape[0])
    if len(c) != len(basis):
        raise DimensionError(f"expected {len(basis)} coordinates, got {len(c)}")
    return U @ sum(ci * E for ci, E in zip(c, basis))


def eigenphases(V: np.ndarray, tau_cut: float = TAU_CUT) -> tuple[np.ndarray, np.ndarray, bool]:
    """Unitary eigendecomposition V = Z diag(exp(i theta)) Z^dag with theta in (-pi, pi].

    Uses the complex Schur form, which is diagonal for normal matrices and keeps
    Z unitary even inside degenerate eigenspaces.  The returned flag is True when
    some eigenvalue lies within ``tau_cut`` of -1; such phases are set to +pi.
    """
    T, Z = schur(np.asarray(V, dtype=complex), output="complex")
    lam = np.diag(T)
    theta = np.angle(lam)
    near = np.abs(lam + 1.0) < tau_cut
    theta[near] = np.pi
    return theta, Z, bool(near.any())


def near_cut_locus(V: np.ndarray, tau_cut: float = TAU_CUT) -> bool:
    return eigenphases(V, tau_cut)[2]


def principal_log(V: np.ndarray, tau_cut: float = TAU_CUT, warn: bool = True) -> np.ndarray:
    """Principal logarithm of a unitary matrix; eigenvalues in (-i pi, i pi].

    Emits :class:`CutLocusWarning` when ``V`` has an eigenvalue within
    ``tau_cut`` of -1 (the branch value +i pi is used there).
    """
    V = _square(V, "V")
    theta, Z, near = eigenphases(V, tau_cut)
    if near and warn:
        warnings.warn("eigenvalue at the cut locus -1; using branch +i*pi", CutLocusWarning, stacklevel=2)
    L = (Z * (1j * theta)) @ dag(Z)
    return skew_part(L)


def exp_skew(Y: np.ndarray, tol: float = EPS_UNITARY) -> np.ndarray:
    """exp(Y) for skew-Hermitian Y, computed from the Hermitian eigenproblem of iY."""
    Y = np.asarray(_square(Y, "Y"), dtype=complex)
    if hs_norm(herm_part(Y)) > tol * max(1.0, hs_norm(Y)):
        raise NotTangentError("exp_skew requires a skew-Hermitian argument")
    h, Q = np.linalg.eigh(1j * skew_part(Y))
    return (Q * np.exp(-1j * h)) @ dag(Q)


def retract(U: np.ndarray, dU: np.ndarray, s: float = 1.0, tol: float = EPS_UNITARY) -> np.ndarray:
    """Geodesic step U exp(s U^dag dU)."""
    dU = check_tangent(U, dU, tol)
    if s == 0:
        return np.array(U, dtype=complex)
    return U @ exp_skew(s * skew_part(dag(U) @ dU))


def haar_unitary(N: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed U(N) element via QR of a complex Ginibre matrix."""
    if N == 0:
        return np.zeros((0, 0), dtype=complex)
    Z = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_tangent(U: np.ndarray, rng: np.random.Generator, norm: float | None = None) -> np.ndarray:
    N = U.shape[0]
    G = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    T = U @ skew_part(G)
    if norm is not None:
        T *= norm / hs_norm(T)
    return T


def block_diag(*blocks: np.ndarray) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


@dataclass(frozen=True)
class WeightSpectrum:
    """Spectral data of A A^dag with eigenvalues grouped into clusters.

    ``omega_sq`` holds the raw eigenvalues in nonincreasing order and ``D`` the
    matching eigenvectors; ``distinct``/``mult`` describe the nonzero clusters and
    ``null_mult`` the zero cluster.
    """

    A: np.ndarray
    D: np.ndarray
    omega_sq: np.ndarray
    distinct: tuple[float, ...]
    mult: tuple[int, ...]
    null_mult: int

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def kappa(self) -> int:
        return len(self.distinct)

    @property
    def norm_sq(self) -> float:
        """||A||^2 = Tr(A A^dag)."""
        return float(np.sum(np.abs(self.A) ** 2))

    @property
    def omega_sq_clustered(self) -> np.ndarray:
        """Length-N eigenvalue vector with every cluster replaced by its representative."""
        vals = [w for w, n in zip(self.distinct, self.mult) for _ in range(n)]
        return np.array(vals + [0.0] * self.null_mult)

    @property
    def gram(self) -> np.ndarray:
        return self.A @ dag(self.A)

    def rebased(self, D: np.ndarray) -> WeightSpectrum:
        """Same spectrum with another diagonalizer (differs from D by a block unitary)."""
        return WeightSpectrum(self.A, np.asarray(D, dtype=complex), self.omega_sq, self.distinct, self.mult, self.null_mult)


def analyze_weight(A: np.ndarray, tau_cluster: float = TAU_CLUSTER) -> WeightSpectrum:
    """Diagonalize A A^dag and cluster its eigenvalues.

    Eigenvalues below ``tau_cluster * max(1, ||A||^2)`` form the null cluster.
    The others are grouped greedily in decreasing order: a new cluster starts
    when an eigenvalue differs from the current cluster's leading value by more
    than ``tau_cluster * max(1, value)``.
    """
    A = np.asarray(_square(A, "A"), dtype=complex)
    G = A @ dag(A)
    w, V = np.linalg.eigh(herm_part(G))
    order = np.argsort(-w, kind="stable")
    w = np.clip(w[order], 0.0, None)
    D = V[:, order]

    null_cut = tau_cluster * max(1.0, float(np.sum(np.abs(A) ** 2)))
    clusters: list[list[float]] = []
    null_mult = 0
    for x in w:
        if x < null_cut:
            null_mult += 1
            continue
        if clusters and abs(clusters[-1][0] - x) <= tau_cluster * max(1.0, clusters[-1][0]):
            clusters[-1].append(float(x))
        else:
            clusters.append([float(x)])
    distinct = tuple(float(np.mean(c)) for c in clusters)
    mult = tuple(len(c) for c in clusters)
    return WeightSpectrum(A=A, D=D, omega_sq=w, distinct=distinct, mult=mult, null_mult=null_mult)


def weight_from_spectrum(values: list[float] | np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
    """Build A with A A^dag having the given eigenvalues (randomly rotated when ``rng`` is given)."""
    vals = np.asarray(values, dtype=float)
    if np.any(vals < 0):
        raise ValueError("eigenvalues of A A^dag must be nonnegative")
    A = np.diag(np.sqrt(vals)).astype(complex)
    if rng is not None:
        N = len(vals)
        A = haar_unitary(N, rng) @ A @ haar_unitary(N, rng)
    return A
