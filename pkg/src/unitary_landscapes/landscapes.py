"""Kinematic control landscapes on U(N) and their derivatives.

Four kinds are supported:

* ``F``  -- ||(U - W) A||^2
* ``P``  -- ||A||^4 - |Tr(A A^dag W^dag U)|^2   (phase invariant)
* ``G``  -- half squared geodesic distance to W
* ``GP`` -- half squared geodesic distance to W in PU(N)

Gradients are Riemannian gradients for the real Hilbert-Schmidt metric.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CutLocusWarning, DimensionError, KindError, LandscapeError
from .matgeom import (
    TAU_CUT,
    WeightSpectrum,
    analyze_weight,
    dag,
    eigenphases,
    exp_skew,
    hs_norm,
    inner,
    principal_log,
    project_to_tangent,
    skew_basis,
    skew_part,
)

KINDS = ("F", "P", "G", "GP")
TRACE_TOL = 1e-10


@dataclass(frozen=True)
class LandscapeSpec:
    kind: str
    W: np.ndarray
    weight: WeightSpectrum | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise KindError(f"unknown landscape kind {self.kind!r}")
        W = np.asarray(self.W, dtype=complex)
        object.__setattr__(self, "W", W)
        if self.kind in ("F", "P"):
            if self.weight is None:
                raise KindError(f"kind {self.kind} needs a weight matrix")
            if self.weight.N != W.shape[0]:
                raise DimensionError("weight and target dimensions differ")
        elif self.weight is not None:
            if self.weight.N != W.shape[0] or not np.allclose(self.weight.A, np.eye(W.shape[0]), atol=1e-12):
                raise KindError(f"kind {self.kind} takes no weight (A must be absent or identity)")

    @classmethod
    def make(cls, kind: str, W: np.ndarray, A: np.ndarray | None = None, tau_cluster: float = 1e-8) -> LandscapeSpec:
        weight = None if A is None else analyze_weight(A, tau_cluster)
        return cls(kind, W, weight)

    @property
    def N(self) -> int:
        return self.W.shape[0]

    @property
    def gram(self) -> np.ndarray:
        """A A^dag (identity for the geodesic kinds)."""
        if self.weight is None:
            return np.eye(self.N, dtype=complex)
        return self.weight.gram

    @property
    def scale(self) -> float:
        """Natural magnitude of values and Hessian eigenvalues, used to scale tolerances."""
        if self.kind == "F":
            return max(1.0, self.weight.norm_sq)
        if self.kind == "P":
            return max(1.0, self.weight.norm_sq ** 2)
        return 1.0

    def with_target(self, W: np.ndarray) -> LandscapeSpec:
        return LandscapeSpec(self.kind, W, self.weight)


def _check_dim(spec: LandscapeSpec, U: np.ndarray) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.shape != spec.W.shape:
        raise DimensionError(f"U has shape {U.shape}, target has {spec.W.shape}")
    return U


def _overlap(spec: LandscapeSpec, U: np.ndarray) -> complex:
    """Tr(A A^dag W^dag U)."""
    return complex(np.trace(spec.gram @ dag(spec.W) @ U))


def _wrap(x: np.ndarray) -> np.ndarray:
    """Map angles into (-pi, pi]."""
    return np.pi - np.mod(np.pi - x, 2 * np.pi)


@dataclass(frozen=True)
class ProjectiveBranch:
    """Result of the Z_N branch search for the projective geodesic landscape."""

    k: int
    log: np.ndarray           # principal log of exp(2 pi i k/N) det(X)^(-1/N) X
    values: np.ndarray        # half squared norms for every k
    near_cut: bool


def projective_branch(U: np.ndarray, W: np.ndarray, tau_cut: float = TAU_CUT) -> ProjectiveBranch:
    """Evaluate all N branches e^{2 pi i k/N} det(U^dag W)^{-1/N} U^dag W; pick the smallest.

    The principal N-th root of the determinant is taken; any other root only
    relabels k.  Ties go to the smallest k.
    """
    X = dag(U) @ W
    N = X.shape[0]
    theta, Z, _ = eigenphases(X, tau_cut)
    arg_det = float(np.angle(np.prod(np.exp(1j * theta))))
    phases = np.array([_wrap(theta + (2 * np.pi * k - arg_det) / N) for k in range(N)])
    at_cut = np.abs(np.abs(phases) - np.pi) < tau_cut
    phases[at_cut] = np.pi
    values = 0.5 * np.sum(phases ** 2, axis=1)
    k = int(np.argmin(values))
    L = skew_part((Z * (1j * phases[k])) @ dag(Z))
    return ProjectiveBranch(k=k, log=L, values=values, near_cut=bool(at_cut[k].any()))


def value(spec: LandscapeSpec, U: np.ndarray) -> float:
    U = _check_dim(spec, U)
    kind = spec.kind
    # both weighted kinds are evaluated as norms of differences, which keeps
    # full relative accuracy near the minimum where the trace forms cancel
    A = spec.weight.A if spec.weight is not None else None
    if kind == "F":
        return hs_norm((U - spec.W) @ A) ** 2
    if kind == "P":
        t = _overlap(spec, U)
        phase = t / abs(t) if abs(t) > 0 else 1.0
        half_gap = 0.5 * hs_norm((np.conj(phase) * U - spec.W) @ A) ** 2    # ||A||^2 - |t|
        return half_gap * (spec.weight.norm_sq + abs(t))
    if kind == "G":
        L = principal_log(dag(U) @ spec.W, warn=False)
        return 0.5 * hs_norm(L) ** 2
    return float(projective_branch(U, spec.W).values.min())


def gradient(spec: LandscapeSpec, U: np.ndarray) -> np.ndarray:
    """Riemannian gradient at U (a tangent vector at U)."""
    U = _check_dim(spec, U)
    W, G = spec.W, spec.gram
    kind = spec.kind
    if kind == "F":
        return U @ G @ dag(W) @ U - W @ G
    if kind == "P":
        t = _overlap(spec, U)
        return np.conj(t) * (U @ G @ dag(W) @ U) - t * (W @ G)
    if kind == "G":
        X = dag(U) @ W
        if eigenphases(X)[2]:
            warnings.warn("U^dag W is at the cut locus; gradient is multiply defined", CutLocusWarning, stacklevel=2)
        return -U @ principal_log(X, warn=False)
    br = projective_branch(U, W)
    if br.near_cut:
        warnings.warn("U^dag W is at the projective cut locus", CutLocusWarning, stacklevel=2)
    N = spec.N
    tr = np.trace(br.log)
    if abs(tr) / np.sqrt(N) > TRACE_TOL and not br.near_cut:
        raise LandscapeError(f"minimizing branch has nonzero trace {abs(tr):.3e}")
    return -U @ (br.log - (tr / N) * np.eye(N))


def gradient_norm(spec: LandscapeSpec, U: np.ndarray) -> float:
    return hs_norm(gradient(spec, U))


def hessian_apply(spec: LandscapeSpec, U: np.ndarray, dU: np.ndarray) -> np.ndarray:
    """Covariant Hessian Hess_U(dU) for kinds F and P.

    Differentiates the ambient extension of the gradient field and projects the
    result onto T_U U(N); valid at any U, not only at critical points.
    """
    U = _check_dim(spec, U)
    W, G = spec.W, spec.gram
    Wd = dag(W)
    if spec.kind == "F":
        ambient = dU @ G @ Wd @ U + U @ G @ Wd @ dU
    elif spec.kind == "P":
        t = _overlap(spec, U)
        ambient = (
            np.trace(dag(dU) @ W @ G) * (U @ G @ Wd @ U)
            + np.conj(t) * (dU @ G @ Wd @ U + U @ G @ Wd @ dU)
            - np.trace(G @ Wd @ dU) * (W @ G)
        )
    else:
        raise KindError(f"no closed-form Hessian for kind {spec.kind}; use hessian_matrix")
    return project_to_tangent(U, ambient)


def hessian_operator(spec: LandscapeSpec, U: np.ndarray) -> np.ndarray:
    """Matrix of :func:`hessian_apply` in the orthonormal frame {U Y_a}."""
    basis = skew_basis(spec.N)
    cols = [hessian_apply(spec, U, U @ E) for E in basis]
    return np.array([[inner(U @ Ea, c) for c in cols] for Ea in basis])


def hessian_matrix(spec: LandscapeSpec, U: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Numerical Hessian quadratic form in the frame {U Y_a}.

    Second central differences of s -> value(U exp(s Y)); off-diagonal entries
    by polarization.  Along geodesics this is the covariant Hessian, though it
    is only used for inertia claims at critical points.
    """
    if not 1e-7 <= h <= 1e-2:
        raise ValueError(f"step h={h} outside [1e-7, 1e-2]")
    U = _check_dim(spec, U)
    basis = skew_basis(spec.N)
    f0 = value(spec, U)

    def d2(Y: np.ndarray) -> float:
        return (value(spec, U @ exp_skew(h * Y)) - 2.0 * f0 + value(spec, U @ exp_skew(-h * Y))) / h ** 2

    n = len(basis)
    diag = np.array([d2(E) for E in basis])
    H = np.diag(diag)
    for a in range(n):
        for b in range(a + 1, n):
            H[a, b] = H[b, a] = 0.25 * (d2(basis[a] + basis[b]) - d2(basis[a] - basis[b]))
    return H


def adjoint_rep_value(A: np.ndarray, W: np.ndarray, U: np.ndarray) -> float:
    """||(Ad(U) - Ad(W)) o B||^2 with B(Omega) = A Omega A^dag, summed over a basis of u(N).

    Independent of the closed form for J_P; it should equal 2 J_P(U).
    """
    A = np.asarray(A, dtype=complex)
    X = dag(W) @ U
    total = 0.0
    for E in skew_basis(A.shape[0]):
        B = A @ E @ dag(A)
        total += 2.0 * inner(B, B) - 2.0 * inner(B, X @ B @ dag(X))
    return total


def log_adjoint_residual(V: np.ndarray, dV: np.ndarray, h: float = 1e-6) -> float:
    """Check that the adjoint of d log at V maps log(V) to V log(V).

    Compares <d log_V(dV), log V> (central differences of the principal log
    along the geodesic through V) with <dV, V log V>; returns |difference|.
    """
    L = principal_log(V)
    Y = skew_part(dag(V) @ dV)
    dlog = (principal_log(V @ exp_skew(h * Y)) - principal_log(V @ exp_skew(-h * Y))) / (2 * h)
    return abs(inner(dlog, L) - inner(dV, V @ L))
