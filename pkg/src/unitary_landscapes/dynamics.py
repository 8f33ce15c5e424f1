"""Piecewise-constant Schrodinger propagation and the control-to-propagator map.

The field E(t) is constant on each of ``m`` slices of length dt = T/m and the
Hamiltonian on slice j is H_j = H0 - E_j mu.  V_j denotes the propagator from
0 to the end of slice j, so V_0 = I and V_m = V_T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from dataclasses import field as dc_field
from functools import cached_property

import numpy as np

from .errors import DimensionError, NotCriticalError, RankDeficientError
from .landscapes import LandscapeSpec, gradient, hessian_matrix, hessian_operator, value
from .matgeom import EPS_UNITARY, check_tangent, dag, hs_norm, inner, skew_basis

TAU_HERM = 1e-12
TAU_RANK = 1e-8
MAX_DYSON_ORDER = 12


@dataclass(frozen=True)
class ControlProblem:
    H0: np.ndarray
    mu: np.ndarray
    T: float
    slices: int
    hbar: float = 1.0

    def __post_init__(self):
        H0 = np.asarray(self.H0, dtype=complex)
        mu = np.asarray(self.mu, dtype=complex)
        if H0.ndim != 2 or H0.shape[0] != H0.shape[1] or H0.shape != mu.shape:
            raise DimensionError(f"H0 {H0.shape} and mu {mu.shape} must be square and equal in size")
        for name, M in (("H0", H0), ("mu", mu)):
            if np.max(np.abs(M - dag(M)), initial=0.0) > TAU_HERM * max(1.0, np.max(np.abs(M))):
                raise ValueError(f"{name} is not Hermitian")
        if not self.T > 0 or not math.isfinite(self.T):
            raise ValueError(f"horizon T must be positive, got {self.T}")
        if int(self.slices) != self.slices or self.slices < 1:
            raise ValueError(f"slice count must be a positive integer, got {self.slices}")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        object.__setattr__(self, "H0", 0.5 * (H0 + dag(H0)))
        object.__setattr__(self, "mu", 0.5 * (mu + dag(mu)))
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "slices", int(self.slices))

    @property
    def N(self) -> int:
        return self.H0.shape[0]

    @property
    def dt(self) -> float:
        return self.T / self.slices

    def with_slices(self, m: int) -> ControlProblem:
        return ControlProblem(self.H0, self.mu, self.T, m, self.hbar)

    def field(self, samples) -> ControlField:
        return ControlField(np.asarray(samples, dtype=float), self.T)

    def zero_field(self) -> ControlField:
        return ControlField(np.zeros(self.slices), self.T)


@dataclass(frozen=True)
class ControlField:
    """Slice values of a piecewise-constant field on [0, T]."""

    samples: np.ndarray
    T: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).ravel()
        if s.size == 0 or not np.all(np.isfinite(s)):
            raise ValueError("field samples must be a nonempty finite vector")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "T", float(self.T))

    @property
    def m(self) -> int:
        return self.samples.size

    @property
    def dt(self) -> float:
        return self.T / self.m

    def inner(self, other: ControlField) -> float:
        return float(np.dot(self.samples, other.samples) * self.dt)

    def norm(self) -> float:
        return math.sqrt(max(0.0, self.inner(self)))

    def __add__(self, other: ControlField) -> ControlField:
        return ControlField(self.samples + other.samples, self.T)

    def __sub__(self, other: ControlField) -> ControlField:
        return ControlField(self.samples - other.samples, self.T)

    def __mul__(self, a: float) -> ControlField:
        return ControlField(a * self.samples, self.T)

    __rmul__ = __mul__

    def refined(self, factor: int = 2) -> ControlField:
        """The same piecewise-constant function on ``factor`` times as many slices."""
        return ControlField(np.repeat(self.samples, factor), self.T)


def _exp_herm(evals: np.ndarray, Q: np.ndarray, tau: float) -> np.ndarray:
    """exp(-i tau H) for H = Q diag(evals) Q^dag."""
    return (Q * np.exp(-1j * tau * evals)) @ dag(Q)


@dataclass(frozen=True)
class PropagatorTrajectory:
    problem: ControlProblem
    field: ControlField
    V: np.ndarray            # (m+1, N, N), V[0] = I
    evals: np.ndarray        # (m, N) eigenvalues of H_j
    evecs: np.ndarray        # (m, N, N) eigenvectors of H_j
    steps: np.ndarray = dc_field(repr=False)   # (m, N, N) slice exponentials

    @property
    def VT(self) -> np.ndarray:
        return self.V[-1]

    @property
    def m(self) -> int:
        return self.problem.slices

    def midpoint_propagators(self) -> np.ndarray:
        """V at the centre of every slice (half-slice exponential applied to V_{j-1})."""
        cp = self.problem
        half = np.array([_exp_herm(e, Q, 0.5 * cp.dt / cp.hbar) for e, Q in zip(self.evals, self.evecs)])
        return half @ self.V[:-1]

    @cached_property
    def slice_integrals(self) -> np.ndarray:
        """K_j = int over slice j of V_t^dag mu V_t dt, evaluated exactly."""
        cp = self.problem
        dt, hbar = cp.dt, cp.hbar
        K = np.empty((self.m, cp.N, cp.N), dtype=complex)
        for j in range(self.m):
            Q, lam = self.evecs[j], self.evals[j]
            y = (lam[:, None] - lam[None, :]) * dt / hbar
            phi = dt * np.exp(0.5j * y) * np.sinc(y / (2 * np.pi))
            S = Q @ ((dag(Q) @ cp.mu @ Q) * phi) @ dag(Q)
            K[j] = dag(self.V[j]) @ S @ self.V[j]
        return K


def _check_field(cp: ControlProblem, fld: ControlField) -> ControlField:
    if not isinstance(fld, ControlField):
        fld = cp.field(fld)
    if fld.m != cp.slices:
        raise DimensionError(f"field has {fld.m} samples, problem has {cp.slices} slices")
    if abs(fld.T - cp.T) > 1e-12 * cp.T:
        raise DimensionError(f"field horizon {fld.T} != problem horizon {cp.T}")
    return fld


def propagate(cp: ControlProblem, fld: ControlField | np.ndarray) -> PropagatorTrajectory:
    fld = _check_field(cp, fld)
    N, m = cp.N, cp.slices
    H = cp.H0[None, :, :] - fld.samples[:, None, None] * cp.mu[None, :, :]
    evals, evecs = np.linalg.eigh(H)
    tau = cp.dt / cp.hbar
    steps = (evecs * np.exp(-1j * tau * evals)[:, None, :]) @ np.conj(np.swapaxes(evecs, 1, 2))
    V = np.empty((m + 1, N, N), dtype=complex)
    V[0] = np.eye(N)
    for j in range(m):
        V[j + 1] = steps[j] @ V[j]
    return PropagatorTrajectory(cp, fld, V, evals, evecs, steps)


def dyson_oracle(cp: ControlProblem, fld: ControlField | np.ndarray, order: int) -> np.ndarray:
    """Partial Dyson sum I + sum_{n=1}^{order} (-i/hbar)^n (time-ordered n-fold integrals).

    For piecewise-constant H the n-th term is the sum over all ways of spending
    n orders across the slices; each slice contributes (-i H_j dt/hbar)^a / a!.
    Those sums are accumulated slice by slice, tracked by total order.
    """
    if int(order) != order or order < 0:
        raise ValueError("order must be a nonnegative integer")
    if order > MAX_DYSON_ORDER:
        raise ValueError(f"order {order} exceeds the guard {MAX_DYSON_ORDER}")
    fld = _check_field(cp, fld)
    N = cp.N
    P = [np.eye(N, dtype=complex)] + [np.zeros((N, N), complex) for _ in range(order)]
    for e in fld.samples:
        X = -1j * (cp.H0 - e * cp.mu) * cp.dt / cp.hbar
        terms = [np.eye(N, dtype=complex)]
        for a in range(1, order + 1):
            terms.append(X @ terms[-1] / a)
        P = [sum(terms[a] @ P[k - a] for a in range(k + 1)) for k in range(order + 1)]
    return sum(P)


def hamiltonian_l2_norm(cp: ControlProblem, fld: ControlField | np.ndarray) -> float:
    """(int_0^T ||H(t)||^2 dt)^(1/2) with the operator 2-norm."""
    fld = _check_field(cp, fld)
    norms = [np.linalg.norm(cp.H0 - e * cp.mu, 2) for e in fld.samples]
    return math.sqrt(float(np.sum(np.square(norms)) * cp.dt))


def dyson_tail_bound(cp: ControlProblem, fld: ControlField | np.ndarray, order: int) -> float:
    """sum_{n > order} x^n / n! with x = sqrt(T) ||H||_{L2} / hbar."""
    x = math.sqrt(cp.T) * hamiltonian_l2_norm(cp, fld) / cp.hbar
    total, term, n = 0.0, 1.0, 0
    while True:
        n += 1
        term *= x / n
        if n > order:
            total += term
            if term < 1e-18 * max(total, 1e-300) or n > order + 400:
                return total


def frechet_dV(traj: PropagatorTrajectory, dfield: ControlField | np.ndarray) -> np.ndarray:
    """dV_T(dE) = (i/hbar) V_T sum_j dE_j K_j, exact for piecewise-constant perturbations."""
    cp = traj.problem
    d = _check_field(cp, dfield).samples
    return (1j / cp.hbar) * traj.VT @ np.tensordot(d, traj.slice_integrals, axes=1)


def dV_matrix(traj: PropagatorTrajectory) -> np.ndarray:
    """Jacobian of field samples to frame coordinates {V_T Y_a}: shape (N^2, m)."""
    cp = traj.problem
    basis = np.array(skew_basis(cp.N))
    body = (1j / cp.hbar) * traj.slice_integrals
    return np.einsum("aij,kij->ak", np.conj(basis), body).real


def adjoint_dV(traj: PropagatorTrajectory, A_tan: np.ndarray, quadrature: str = "midpoint") -> ControlField:
    """Adjoint of dV_T in the L2 field metric.

    ``midpoint`` samples -(1/hbar) Im Tr(A^dag V_T V_t^dag mu V_t) at slice centres,
    which agrees with the exact adjoint of :func:`frechet_dV` up to O(dt^2);
    ``exact`` uses slice averages and is the exact adjoint.
    """
    cp = traj.problem
    A_tan = check_tangent(traj.VT, A_tan, tol=max(EPS_UNITARY, 1e-9))
    B = dag(A_tan) @ traj.VT
    if quadrature == "midpoint":
        Vm = traj.midpoint_propagators()
        M = dag(Vm) @ cp.mu[None] @ Vm
        g = -np.einsum("ij,kji->k", B, M).imag / cp.hbar
    elif quadrature == "exact":
        g = -np.einsum("ij,kji->k", B, traj.slice_integrals).imag / (cp.hbar * cp.dt)
    else:
        raise ValueError(f"unknown quadrature {quadrature!r}")
    return ControlField(g, cp.T)


def dynamical_value(cp: ControlProblem, fld: ControlField | np.ndarray, spec: LandscapeSpec) -> float:
    return value(spec, propagate(cp, fld).VT)


def dynamical_gradient(traj: PropagatorTrajectory, spec: LandscapeSpec, quadrature: str = "exact") -> ControlField:
    """L2 gradient of E -> J(V_T(E)): the adjoint of dV_T applied to grad J at V_T."""
    if spec.N != traj.problem.N:
        raise DimensionError("landscape and control problem dimensions differ")
    return adjoint_dV(traj, gradient(spec, traj.VT), quadrature)


def gradient_bound(cp: ControlProblem) -> float:
    """sqrt(T) ||mu|| / hbar, the operator-norm bound of the adjoint of dV_T."""
    return math.sqrt(cp.T) * hs_norm(cp.mu) / cp.hbar


@dataclass(frozen=True)
class DynamicalInertia:
    n_neg: int
    n_zero: int
    n_pos: int
    kinematic: tuple[int, int, int]
    rank: int
    tau: float
    eigenvalues: np.ndarray

    @property
    def consistent(self) -> bool:
        """Nonzero counts equal the kinematic ones (Sylvester's law of inertia)."""
        return (self.n_neg, self.n_pos) == (self.kinematic[0], self.kinematic[2])


def dynamical_hessian_inertia(traj: PropagatorTrajectory, spec: LandscapeSpec, tau: float | None = None,
                              tau_crit: float = 1e-7, tau_rank: float = TAU_RANK,
                              tau_kin: float | None = None) -> DynamicalInertia:
    """Inertia of the discretized Hessian (dV_T)^* Hess J (dV_T) at a regular critical field.

    The m x m matrix is J^T H J / dt where J is :func:`dV_matrix` and H the
    kinematic Hessian in the frame at V_T.  Refuses points where dV_T is not
    of rank N^2 or where V_T is not kinematically critical.
    """
    cp = traj.problem
    N, m = cp.N, cp.slices
    if m < N * N:
        raise RankDeficientError(0, N * N, f"m = {m} slices cannot span the {N * N}-dimensional tangent space")
    gnorm = hs_norm(gradient(spec, traj.VT))
    if gnorm > tau_crit * spec.scale:
        raise NotCriticalError(f"kinematic gradient {gnorm:.3e} at V_T exceeds {tau_crit * spec.scale:.1e}")
    Jm = dV_matrix(traj)
    sv = np.linalg.svd(Jm, compute_uv=False)
    rank = int(np.sum(sv > tau_rank * sv[0]))
    if rank < N * N:
        raise RankDeficientError(rank, N * N, "dV_T is rank deficient at this field")
    if spec.kind in ("F", "P"):
        Hk = hessian_operator(spec, traj.VT)
    else:
        Hk = hessian_matrix(spec, traj.VT)
    Hk = 0.5 * (Hk + Hk.T)
    kev = np.linalg.eigvalsh(Hk)
    tk = 1e-6 * spec.scale if tau_kin is None else tau_kin
    kin = (int(np.sum(kev < -tk)), int(np.sum(np.abs(kev) <= tk)), int(np.sum(kev > tk)))
    G = Jm.T @ Hk @ Jm / cp.dt
    ev = np.linalg.eigvalsh(0.5 * (G + G.T))
    if tau is None:
        tau = 1e-6 * max(1e-300, float(np.max(np.abs(ev))))
    neg, pos = int(np.sum(ev < -tau)), int(np.sum(ev > tau))
    return DynamicalInertia(neg, m - neg - pos, pos, kin, rank, tau, ev)


def adjoint_residual(traj: PropagatorTrajectory, A_tan: np.ndarray, dfield: ControlField,
                     quadrature: str = "midpoint") -> float:
    """Dot-product test |<A, dV(d)> - <dV^*(A), d>_L2| relative to the scale of the bilinear form.

    The scale is ||A|| ||d||_L2 sqrt(T) ||mu|| / hbar, i.e. the bound on
    |<A, dV(d)>| implied by the operator norm of dV_T.
    """
    cp = traj.problem
    dfield = _check_field(cp, dfield)
    lhs = inner(A_tan, frechet_dV(traj, dfield))
    rhs = adjoint_dV(traj, A_tan, quadrature).inner(dfield)
    scale = hs_norm(A_tan) * dfield.norm() * gradient_bound(cp)
    return abs(lhs - rhs) / max(scale, 1e-300)


__all__ = [
    "ControlProblem",
    "ControlField",
    "PropagatorTrajectory",
    "propagate",
    "dyson_oracle",
    "dyson_tail_bound",
    "hamiltonian_l2_norm",
    "frechet_dV",
    "dV_matrix",
    "adjoint_dV",
    "adjoint_residual",
    "dynamical_value",
    "dynamical_gradient",
    "gradient_bound",
    "dynamical_hessian_inertia",
    "DynamicalInertia",
]
