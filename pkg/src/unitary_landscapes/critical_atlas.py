"""Critical strata of the J_F and J_P landscapes.

A critical stratum is labelled by a signature ``nu = (nu_1, ..., nu_kappa)``
with ``0 <= nu_i <= n_i``: the number of -1 entries placed in the i-th
eigenvalue cluster of A A^dag.  Everything here is computed from a
:class:`~unitary_landscapes.matgeom.WeightSpectrum`; numerical Hessians are
used only as cross-checks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .errors import KindError, NotCriticalError, SecularBracketError, SignatureError
from .landscapes import LandscapeSpec, gradient, hessian_matrix, value
from .matgeom import WeightSpectrum, block_diag, dag, haar_unitary, hs_norm

Signature = tuple[int, ...]

TAU_CRIT = 1e-9
TAU_ORTH = 1e-10

GLOBAL_MIN = "globalMin"
GLOBAL_MAX = "globalMax"
LOCAL_MAX = "localMax"
SADDLE = "saddle"


@dataclass(frozen=True)
class CriticalStratum:
    signature: Signature
    kind: str
    critical_value: float
    dimension: int
    inertia: tuple[int, int, int]     # (N-, N0, N+)
    mult: tuple[int, ...]
    max_value: float                  # global maximum of the landscape
    cls: str = ""

    @property
    def n_neg(self) -> int:
        return self.inertia[0]

    @property
    def n_zero(self) -> int:
        return self.inertia[1]

    @property
    def n_pos(self) -> int:
        return self.inertia[2]


@dataclass(frozen=True)
class GlobalMaxDescriptor:
    """The J_P level set {Tr(A A^dag W^dag U) = 0}; not a signature stratum."""

    critical_value: float
    nondegenerate: bool
    codimension: int = 2
    kind: str = "P"
    cls: str = GLOBAL_MAX


@dataclass
class CriticalPointSample:
    stratum: CriticalStratum
    weight: WeightSpectrum
    W: np.ndarray
    gamma_hat: np.ndarray
    null_block: np.ndarray
    theta: float
    point: np.ndarray
    gradient_norm: float = field(default=0.0)

    @property
    def spec(self) -> LandscapeSpec:
        return LandscapeSpec(self.stratum.kind, self.W, self.weight)


def _kind(kind: str) -> str:
    if kind not in ("F", "P"):
        raise KindError(f"critical atlas covers kinds F and P, not {kind!r}")
    return kind


def _scale(ws: WeightSpectrum, kind: str) -> float:
    return max(1.0, ws.norm_sq) if kind == "F" else max(1.0, ws.norm_sq ** 2)


def signatures(ws: WeightSpectrum) -> list[Signature]:
    """All prod(n_i + 1) signatures in lexicographic order."""
    return [tuple(s) for s in itertools.product(*(range(n + 1) for n in ws.mult))]


def check_signature(ws: WeightSpectrum, nu) -> Signature:
    nu = tuple(int(v) for v in nu)
    if len(nu) != ws.kappa:
        raise SignatureError(f"signature length {len(nu)} != kappa = {ws.kappa}")
    for v, n in zip(nu, ws.mult):
        if not 0 <= v <= n:
            raise SignatureError(f"signature {nu} out of bounds for multiplicities {ws.mult}")
    return nu


def lambda_trace(ws: WeightSpectrum, nu: Signature) -> float:
    """Tr(Omega^2 (Lambda + I_n0)) = sum_i (n_i - 2 nu_i) w_i."""
    return float(sum((n - 2 * v) * w for v, n, w in zip(nu, ws.mult, ws.distinct)))


def lambda_hat(ws: WeightSpectrum, nu: Signature) -> np.ndarray:
    """Diagonal of Lambda + I_n0 in the D frame: -1 first within each cluster, then +1."""
    out = []
    for v, n in zip(nu, ws.mult):
        out += [-1.0] * v + [1.0] * (n - v)
    return np.array(out + [1.0] * ws.null_mult)


def critical_value(ws: WeightSpectrum, nu: Signature, kind: str) -> float:
    a = sum(v * w for v, w in zip(nu, ws.distinct))
    if _kind(kind) == "F":
        return 4.0 * a
    b = sum((n - v) * w for v, n, w in zip(nu, ws.mult, ws.distinct))
    return 4.0 * a * b


def stratum_dimension(ws: WeightSpectrum, nu: Signature, kind: str) -> int:
    d = ws.null_mult ** 2 + 2 * sum(v * (n - v) for v, n in zip(nu, ws.mult))
    return d + (1 if _kind(kind) == "P" else 0)


def _p_admissible(ws: WeightSpectrum, nu: Signature, tau_orth: float = TAU_ORTH) -> bool:
    return lambda_trace(ws, nu) > tau_orth * max(1.0, ws.norm_sq)


def stratum_inertia(ws: WeightSpectrum, nu, kind: str, tau_orth: float = TAU_ORTH) -> tuple[int, int, int]:
    """Closed-form Hessian inertia (N-, N0, N+) on the stratum ``nu``.

    Cross-cluster pairs (i in cluster k holding a -1, j in cluster l holding a
    +1) are negative exactly when w_k > w_l, i.e. k < l for clusters sorted by
    decreasing eigenvalue.
    """
    kind = _kind(kind)
    nu = check_signature(ws, nu)
    if kind == "P" and not _p_admissible(ws, nu, tau_orth):
        raise SignatureError(f"signature {nu} has Tr(Omega^2 Lambda) <= 0; not a J_P stratum")
    N, n0, n = ws.N, ws.null_mult, ws.mult
    s = sum(nu)
    plus = N - n0 - s
    down = sum(nu[k] * (n[l] - nu[l]) for k in range(len(n)) for l in range(len(n)) if k < l)
    up = sum(nu[k] * (n[l] - nu[l]) for k in range(len(n)) for l in range(len(n)) if k > l)
    n_neg = s * s + 2 * down + 2 * n0 * s
    n_pos = plus * plus + 2 * n0 * plus + 2 * up
    n_zero = n0 * n0 + 2 * sum(v * (m - v) for v, m in zip(nu, n))
    if kind == "P":
        n_pos -= 1
        n_zero += 1
    assert n_neg + n_zero + n_pos == N * N
    return n_neg, n_zero, n_pos


def classify(stratum: CriticalStratum | GlobalMaxDescriptor) -> str:
    if isinstance(stratum, GlobalMaxDescriptor):
        return GLOBAL_MAX
    n_neg, _, n_pos = stratum.inertia
    if n_neg == 0 and (n_pos > 0 or all(v == 0 for v in stratum.signature)):
        return GLOBAL_MIN
    if n_pos == 0:
        if stratum.kind == "F" and stratum.signature == stratum.mult:
            return GLOBAL_MAX
        # strict inequality: a stratum at the J_P maximum value is not a local max
        if stratum.kind == "P" and stratum.critical_value < stratum.max_value * (1 - 1e-12):
            return LOCAL_MAX
    return SADDLE


def make_stratum(ws: WeightSpectrum, nu, kind: str) -> CriticalStratum:
    kind = _kind(kind)
    nu = check_signature(ws, nu)
    max_value = 4.0 * ws.norm_sq if kind == "F" else ws.norm_sq ** 2
    st = CriticalStratum(
        signature=nu,
        kind=kind,
        critical_value=critical_value(ws, nu, kind),
        dimension=stratum_dimension(ws, nu, kind),
        inertia=stratum_inertia(ws, nu, kind),
        mult=tuple(ws.mult),
        max_value=max_value,
    )
    return CriticalStratum(**{**st.__dict__, "cls": classify(st)})


def global_max_descriptor(ws: WeightSpectrum, tau_orth: float = TAU_ORTH) -> GlobalMaxDescriptor:
    return GlobalMaxDescriptor(critical_value=ws.norm_sq ** 2, nondegenerate=jp_globalmax_nondegenerate(ws, tau_orth))


def enumerate_strata(ws: WeightSpectrum, kind: str, include_max_set: bool = True,
                     tau_orth: float = TAU_ORTH) -> list:
    """All critical strata for ``kind``.

    For kind P only signatures with Tr(Omega^2 Lambda) > 0 appear (the others
    are the same sets up to global phase, or lie in the maximum set); the
    global-maximum descriptor is appended last unless ``include_max_set`` is False.
    """
    kind = _kind(kind)
    sigs = signatures(ws)
    if kind == "P":
        sigs = [nu for nu in sigs if _p_admissible(ws, nu, tau_orth)]
    out: list = [make_stratum(ws, nu, kind) for nu in sigs]
    if kind == "P" and include_max_set:
        out.append(global_max_descriptor(ws, tau_orth))
    return out


def jp_globalmax_nondegenerate(ws: WeightSpectrum, tau_orth: float = TAU_ORTH) -> bool:
    """True iff no signature has sum_i (n_i - 2 nu_i) w_i = 0.

    Then dF is surjective on the maximum set, which is a nondegenerate
    codimension-2 submanifold.
    """
    tol = tau_orth * max(1.0, ws.norm_sq)
    return all(abs(lambda_trace(ws, nu)) > tol for nu in signatures(ws))


# -- Hessian spectra -------------------------------------------------------

def _merge(values, tol: float) -> list[tuple[float, int]]:
    """Group a list of reals into (value, multiplicity) pairs with tolerance ``tol``."""
    out: list[list] = []
    for x in sorted(values):
        if out and abs(x - out[-1][0]) <= tol:
            out[-1][1] += 1
        else:
            out.append([float(x), 1])
    return [(g, c) for g, c in out]


def expand(spectrum: list[tuple[float, int]]) -> np.ndarray:
    return np.array(sorted(g for g, c in spectrum for _ in range(c)))


def spectrum_inertia(spectrum: list[tuple[float, int]], tol: float) -> tuple[int, int, int]:
    neg = sum(c for g, c in spectrum if g < -tol)
    pos = sum(c for g, c in spectrum if g > tol)
    return neg, sum(c for _, c in spectrum) - neg - pos, pos


def jf_hessian_spectrum(ws: WeightSpectrum, nu) -> list[tuple[float, int]]:
    """Eigenvalues w_i lam_i + w_j lam_j of Hess J_F, one per ordered pair (i, j)."""
    nu = check_signature(ws, nu)
    lw = lambda_hat(ws, nu) * ws.omega_sq_clustered
    gam = (lw[:, None] + lw[None, :]).ravel()
    return _merge(gam, 1e-12 * max(1.0, ws.norm_sq))


def secular_roots(poles: np.ndarray, weights: np.ndarray, margin: float = 1e-12) -> np.ndarray:
    """Roots of f(g) = sum_k weights_k / (poles_k - g) = 1, one per pole interval.

    ``poles`` must be distinct and increasing.  Returns gamma_1 < poles_1 and
    poles_{k-1} < gamma_k < poles_k.
    """
    poles = np.asarray(poles, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if np.any(np.diff(poles) <= 0):
        raise SecularBracketError("poles must be distinct and increasing")

    def F(g: float) -> float:
        return float(np.sum(weights / (poles - g))) - 1.0

    roots = []
    for k, eta in enumerate(poles):
        hi = eta - margin * max(1.0, abs(eta))
        if k == 0:
            lo = eta - float(np.sum(weights)) - 1.0
        else:
            lo = poles[k - 1] + margin * max(1.0, abs(poles[k - 1]))
        flo, fhi = F(lo), F(hi)
        if not (flo < 0 < fhi):
            raise SecularBracketError(f"no sign change on ({lo:.6g}, {hi:.6g}): f-1 = {flo:.3g}, {fhi:.3g}")
        roots.append(bisect(F, lo, hi, xtol=1e-15 * max(1.0, abs(eta)), rtol=4 * np.finfo(float).eps, maxiter=400))
    return np.array(roots)


def jp_hessian_spectrum(ws: WeightSpectrum, nu, tau_null: float | None = None) -> list[tuple[float, int]]:
    """Eigenvalues of Hess J_P on the stratum ``nu`` (total multiplicity N^2).

    Three families with c = Tr(Omega^2 Lambda):
      off-diagonal pairs  c (lam_i w_i + lam_j w_j);
      traceless diagonal combinations inside one pole group, at the pole 2 c lam_j w_j;
      roots of sum_i 2 w_i^2 / (2 c lam_i w_i - g) = 1, the zero root being the phase direction.
    Zero-weight diagonal entries contribute n0 further zeros.
    """
    nu = check_signature(ws, nu)
    c = lambda_trace(ws, nu)
    if c <= TAU_ORTH * max(1.0, ws.norm_sq):
        raise SignatureError(f"signature {nu} is not a J_P stratum (Tr = {c:.3g})")
    scale = max(1.0, ws.norm_sq ** 2)
    tau_null = 1e-6 * scale if tau_null is None else tau_null
    lam = lambda_hat(ws, nu)
    w = ws.omega_sq_clustered
    N, n0 = ws.N, ws.null_mult
    gam: list[float] = []

    lw = lam * w
    for i in range(N):
        for j in range(N):
            if i != j:
                gam.append(c * (lw[i] + lw[j]))

    nz = N - n0
    pole_of = 2.0 * c * lw[:nz]
    groups = _merge(pole_of, 1e-8 * max(1.0, float(np.max(np.abs(pole_of)))))
    poles = np.array([g for g, _ in groups])
    weights = np.zeros(len(poles))
    for i in range(nz):
        weights[int(np.argmin(np.abs(poles - pole_of[i])))] += 2.0 * w[i] ** 2
    for g, m in groups:
        gam += [g] * (m - 1)

    roots = secular_roots(poles, weights)
    zero = np.abs(roots) < tau_null
    if zero.sum() != 1:
        raise SecularBracketError(f"expected exactly one zero secular root, found {int(zero.sum())}")
    roots[zero] = 0.0
    gam += list(roots)
    gam += [0.0] * n0
    assert len(gam) == N * N
    return _merge(gam, 1e-9 * scale)


def hessian_spectrum(ws: WeightSpectrum, nu, kind: str) -> list[tuple[float, int]]:
    return jf_hessian_spectrum(ws, nu) if _kind(kind) == "F" else jp_hessian_spectrum(ws, nu)


# -- sample points ---------------------------------------------------------

def sample_point(ws: WeightSpectrum, nu, kind: str, W: np.ndarray, seed=None, *,
                 gamma_hat: np.ndarray | None = None, null_block: np.ndarray | None = None,
                 theta: float | None = None, tau_crit: float = TAU_CRIT) -> CriticalPointSample:
    """Draw a point of the stratum ``nu``: U = e^{i theta} W D (G Lambda G^dag + X0) D^dag.

    G is Haar in each cluster block, X0 Haar on the null block and theta uniform
    (kind P only; theta = 0 for F).  Raises :class:`NotCriticalError` if the
    result is not critical or its value disagrees with the closed form.
    """
    kind = _kind(kind)
    stratum = make_stratum(ws, nu, kind)
    rng = np.random.default_rng(seed)
    if gamma_hat is None:
        gamma_hat = block_diag(*(haar_unitary(n, rng) for n in ws.mult)) if ws.kappa else np.zeros((0, 0), complex)
    if null_block is None:
        null_block = haar_unitary(ws.null_mult, rng)
    if theta is None:
        theta = float(rng.uniform(0.0, 2 * np.pi)) if kind == "P" else 0.0
    nz = ws.N - ws.null_mult
    Lam = np.diag(lambda_hat(ws, stratum.signature)[:nz]).astype(complex)
    inner_block = block_diag(gamma_hat @ Lam @ dag(gamma_hat), null_block)
    W = np.asarray(W, dtype=complex)
    U = np.exp(1j * theta) * W @ ws.D @ inner_block @ dag(ws.D)

    spec = LandscapeSpec(kind, W, ws)
    scale = _scale(ws, kind)
    gnorm = hs_norm(gradient(spec, U))
    if gnorm > tau_crit * scale:
        raise NotCriticalError(f"gradient norm {gnorm:.3e} at sampled point of stratum {stratum.signature}")
    v = value(spec, U)
    if abs(v - stratum.critical_value) > 1e-9 * scale:
        raise NotCriticalError(f"value {v!r} != closed form {stratum.critical_value!r}")
    return CriticalPointSample(stratum, ws, W, gamma_hat, null_block, theta, U, gnorm)


@dataclass(frozen=True)
class MorseBottReport:
    nullity: int
    dim_formula: int
    passed: bool
    inconclusive: bool
    tau_null: float
    min_nonzero_gamma: float
    eigenvalues: np.ndarray

    @property
    def status(self) -> str:
        return "inconclusive" if self.inconclusive else ("pass" if self.passed else "fail")


def morse_bott_check(sample: CriticalPointSample, tau_null: float | None = None, h: float = 1e-4) -> MorseBottReport:
    """Compare the numerical Hessian nullity at a sample with the stratum dimension.

    The check is inconclusive when ``tau_null`` is not at least a factor 100
    below the smallest nonzero closed-form eigenvalue magnitude.
    """
    st = sample.stratum
    scale = _scale(sample.weight, st.kind)
    tau_null = 1e-6 * scale if tau_null is None else tau_null
    eig = np.linalg.eigvalsh(hessian_matrix(sample.spec, sample.point, h))
    nullity = int(np.sum(np.abs(eig) < tau_null))
    closed = expand(hessian_spectrum(sample.weight, st.signature, st.kind))
    nonzero = np.abs(closed)[np.abs(closed) > 1e-9 * scale]
    gmin = float(nonzero.min()) if nonzero.size else math.inf
    inconclusive = 100.0 * tau_null > gmin
    return MorseBottReport(
        nullity=nullity,
        dim_formula=st.dimension,
        passed=(not inconclusive) and nullity == st.dimension,
        inconclusive=inconclusive,
        tau_null=tau_null,
        min_nonzero_gamma=gmin,
        eigenvalues=eig,
    )
