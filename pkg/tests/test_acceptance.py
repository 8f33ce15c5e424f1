"""Acceptance suite, one test per criterion.

Each test prints a single ``PASS criterion k: ...`` or ``FAIL criterion k: ...``
line (visible with ``pytest -s`` or in the captured output of a failure) and
then asserts. Tolerances are fixed per criterion.
"""

import warnings

import numpy as np

from conftest import SX, SZ
from unitary_landscapes import critical_atlas as ca
from unitary_landscapes.dynamics import (
    ControlProblem,
    adjoint_residual,
    dynamical_gradient,
    dynamical_hessian_inertia,
    dyson_oracle,
    frechet_dV,
    gradient_bound,
    hamiltonian_l2_norm,
    propagate,
)
from unitary_landscapes.errors import CutLocusWarning
from unitary_landscapes.gates import hadamard
from unitary_landscapes.landscapes import (
    KINDS,
    LandscapeSpec,
    adjoint_rep_value,
    gradient,
    hessian_matrix,
    value,
)
from unitary_landscapes.matgeom import (
    analyze_weight,
    haar_unitary,
    hs_norm,
    inner,
    random_tangent,
    retract,
    weight_from_spectrum,
)
from unitary_landscapes.optimize import CONVERGED, flow_kinematic, refine_to_target, synthesize_gate


def verdict(k: int, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
    assert ok, detail


def count_inertia(ev: np.ndarray, tol: float) -> tuple[int, int, int]:
    return int(np.sum(ev < -tol)), int(np.sum(np.abs(ev) <= tol)), int(np.sum(ev > tol))


# eigenvalue patterns of A A^dag for N = 4, covering clusters and null blocks
PATTERNS = [
    lambda r: [r[0], r[0], r[1], 0.0],
    lambda r: [r[0], r[1], r[1], r[1]],
    lambda r: [r[0], r[0], 0.0, 0.0],
    lambda r: [r[0], r[1], r[2], 0.0],
    lambda r: [r[0], r[0], r[1], r[1]],
    lambda r: [r[0]] * 4,
    lambda r: [r[0], r[1], r[2], r[3]],
    lambda r: [r[0], 0.0, 0.0, 0.0],
    lambda r: [r[0], r[1], r[1], 0.0],
    lambda r: [r[0], r[0], r[0], 0.0],
]


def pattern_weight(i: int, rng: np.random.Generator) -> np.ndarray:
    # well separated levels so that clusters are unambiguous
    levels = np.sort(rng.uniform(0.5, 1.0, 4))[::-1] * np.array([4.0, 2.5, 1.5, 1.0])
    return weight_from_spectrum(PATTERNS[i](levels), rng)


def test_criterion_1_stratum_census():
    strata = ca.enumerate_strata(analyze_weight(np.eye(3)), "F")
    dims = [s.dimension for s in strata]
    vals = [round(s.critical_value, 9) for s in strata]
    ok_id = len(strata) == 4 and sorted(dims) == [0, 0, 4, 4] and sorted(vals) == [0, 4, 8, 12]
    rng = np.random.default_rng(1)
    generic = []
    for _ in range(5):
        A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        st = ca.enumerate_strata(analyze_weight(A), "F")
        generic.append((len(st), sum(s.dimension == 0 for s in st)))
    ok_gen = all(g == (16, 16) for g in generic)
    verdict(1, ok_id and ok_gen, f"identity N=3 dims {dims} values {vals}; generic N=4 counts {generic}")


def test_criterion_2_inertia_transfer_f():
    rng = np.random.default_rng(2)
    worst, mismatches, checked = 0.0, [], 0
    for i in range(10):
        ws = analyze_weight(pattern_weight(i, rng))
        W = haar_unitary(4, rng)
        scale = ws.norm_sq
        for st in ca.enumerate_strata(ws, "F"):
            s = ca.sample_point(ws, st.signature, "F", W, seed=i)
            ev = np.linalg.eigvalsh(hessian_matrix(s.spec, s.point))
            closed = ca.expand(ca.jf_hessian_spectrum(ws, st.signature))
            worst = max(worst, np.max(np.abs(ev - closed)) / scale)
            if count_inertia(ev, 1e-5 * scale) != st.inertia:
                mismatches.append((i, st.signature))
            checked += 1
    verdict(2, worst <= 1e-5 and not mismatches,
            f"{checked} strata, worst scaled eigenvalue gap {worst:.2e} (tol 1e-5), inertia mismatches {mismatches}")


MB_SPECTRA = [[4, 1, 1], [3, 2, 1], [1, 1, 1], [5, 5, 2, 0], [2, 1, 1, 0], [4, 4, 1, 1], [1, 0, 0], [9, 4, 1]]


def test_criterion_3_morse_bott():
    rng = np.random.default_rng(3)
    bad, inconclusive, checked = [], [], 0
    for vals in MB_SPECTRA:
        ws = analyze_weight(weight_from_spectrum(vals, rng))
        W = haar_unitary(len(vals), rng)
        for kind in ("F", "P"):
            for st in ca.enumerate_strata(ws, kind, include_max_set=False):
                r = ca.morse_bott_check(ca.sample_point(ws, st.signature, kind, W, seed=checked))
                checked += 1
                if r.inconclusive:
                    inconclusive.append((tuple(vals), kind, st.signature))
                elif not r.passed or r.nullity != st.dimension:
                    bad.append((tuple(vals), kind, st.signature, r.nullity, st.dimension))
    verdict(3, not bad and not inconclusive,
            f"{checked} stratum samples, failures {bad}, inconclusive {inconclusive}")


def test_criterion_4_jp_secular_local_max():
    ws = analyze_weight(np.diag([2.0, 1.0, 1.0]))
    st = ca.make_stratum(ws, (0, 2), "P")
    closed_value = ws.norm_sq ** 2 - (4.0 - 2.0) ** 2
    s = ca.sample_point(ws, (0, 2), "P", haar_unitary(3, np.random.default_rng(4)), seed=0)
    ev = np.linalg.eigvalsh(hessian_matrix(s.spec, s.point))
    tau = 1e-6 * s.spec.scale
    n_pos_numeric = int(np.sum(ev > tau))
    ok = (st.n_pos == 0 and st.cls == ca.LOCAL_MAX and abs(st.critical_value - 32.0) <= 1e-9
          and abs(closed_value - 32.0) <= 1e-9 and n_pos_numeric == 0)
    verdict(4, ok, f"stratum (0,2): value {st.critical_value:.12g}, inertia {st.inertia}, class {st.cls}, "
                   f"numerical positive eigenvalues {n_pos_numeric}, spectrum {np.round(ev, 6).tolist()}")


def test_criterion_5_global_max_parity():
    parity = {N: ca.jp_globalmax_nondegenerate(analyze_weight(np.eye(N))) for N in range(2, 7)}
    ok_par = all(parity[N] == (N % 2 == 1) for N in parity)
    pert = {N: ca.jp_globalmax_nondegenerate(analyze_weight(np.eye(N) + 1e-3 * np.diag(np.arange(1.0, N + 1))))
            for N in (2, 4, 6)}
    verdict(5, ok_par and all(pert.values()), f"identity parity {parity}, perturbed even N {pert}")


def test_criterion_6_oracle_equivalences():
    rng = np.random.default_rng(6)
    worst_p, worst_f = 0.0, 0.0
    for _ in range(100):
        N = int(rng.integers(1, 5))
        A = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        W, U = haar_unitary(N, rng), haar_unitary(N, rng)
        worst_p = max(worst_p, abs(adjoint_rep_value(A, W, U) - 2 * value(LandscapeSpec.make("P", W, A), U)))
        direct = np.sum(np.abs((U - W) @ A) ** 2)
        worst_f = max(worst_f, abs(value(LandscapeSpec.make("F", W, A), U) - direct))
    verdict(6, worst_p <= 1e-9 and worst_f <= 1e-10,
            f"adjoint representation gap {worst_p:.2e} (tol 1e-9), direct F gap {worst_f:.2e} (tol 1e-10)")


def test_criterion_7_gradient_fidelity():
    rng = np.random.default_rng(7)
    worst, counts = {}, {}
    for kind in KINDS:
        w, n = 0.0, 0
        while n < 100:
            N = int(rng.integers(1, 5))
            W, U = haar_unitary(N, rng), haar_unitary(N, rng)
            A = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N)) if kind in ("F", "P") else None
            spec = LandscapeSpec.make(kind, W, A)
            T = random_tangent(U, rng, 1.0)
            with warnings.catch_warnings():
                warnings.simplefilter("error", CutLocusWarning)
                try:
                    an = inner(gradient(spec, U), T)
                except CutLocusWarning:
                    continue
            h = 1e-5
            fd = (value(spec, retract(U, T, h)) - value(spec, retract(U, T, -h))) / (2 * h)
            w = max(w, abs(an - fd) / max(1.0, abs(fd)))
            n += 1
        worst[kind], counts[kind] = w, n
    norm_gap = 0.0
    for _ in range(100):
        N = int(rng.integers(1, 5))
        spec = LandscapeSpec.make("G", haar_unitary(N, rng))
        U = haar_unitary(N, rng)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CutLocusWarning)
            norm_gap = max(norm_gap, abs(hs_norm(gradient(spec, U)) ** 2 - 2 * value(spec, U)))
    ok = all(v <= 1e-5 for v in worst.values()) and norm_gap <= 1e-10
    verdict(7, ok, f"finite-difference worst {({k: f'{v:.1e}' for k, v in worst.items()})} over {counts}; "
                   f"|grad J_G|^2 - 2 J_G gap {norm_gap:.1e}")


def _dyson_worst(x: float, rng: np.random.Generator) -> float:
    worst = 0.0
    for _ in range(20):
        H0 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        mu = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        cp = ControlProblem(H0 + H0.conj().T, mu + mu.conj().T, 1.0, 20)
        f = cp.field(rng.standard_normal(20))
        r = x / (np.sqrt(cp.T) * hamiltonian_l2_norm(cp, f))
        cp = ControlProblem(cp.H0 * r, cp.mu * r, 1.0, 20)
        worst = max(worst, hs_norm(dyson_oracle(cp, f, 8) - propagate(cp, f).VT))
    # constant Hamiltonian with unit operator norm over unit time
    cp = ControlProblem(x * SZ, SX, 1.0, 4)
    return max(worst, hs_norm(dyson_oracle(cp, cp.zero_field(), 8) - propagate(cp, cp.zero_field()).VT))


def test_criterion_8_dynamics():
    rng = np.random.default_rng(8)
    H0 = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    mu = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    cp = ControlProblem((H0 + H0.conj().T) / 2, (mu + mu.conj().T) / 2, 1.0, 25)
    f, d = cp.field(rng.standard_normal(25)), cp.field(rng.standard_normal(25))
    Y = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    Y = (Y - Y.conj().T) / 2
    res = []
    for k in range(4):
        c = cp.with_slices(25 * 2 ** k)
        tr = propagate(c, f.refined(2 ** k))
        res.append(adjoint_residual(tr, tr.VT @ Y, d.refined(2 ** k)))
    ratios = [a / b for a, b in zip(res, res[1:])]
    ok_adj = all(r >= 3.5 for r in ratios)

    tr = propagate(cp, f)
    taylor = []
    for _ in range(10):
        e = cp.field(rng.standard_normal(25))
        e = e * (0.05 / e.norm())
        r1 = hs_norm(propagate(cp, f + e).VT - tr.VT - frechet_dV(tr, e))
        r2 = hs_norm(propagate(cp, f + 0.5 * e).VT - tr.VT - frechet_dV(tr, 0.5 * e))
        taylor.append(r1 / r2)
    ok_taylor = all(abs(t - 4.0) <= 0.2 for t in taylor)

    cb = ControlProblem(SZ, SX, 3.0, 60)
    excess = 0.0
    for i in range(100):
        kind = KINDS[i % 4]
        spec = LandscapeSpec.make(kind, haar_unitary(2, rng), np.diag([1.5, 0.5]) if kind in ("F", "P") else None)
        trb = propagate(cb, 2 * rng.standard_normal(60))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", CutLocusWarning)
            g = dynamical_gradient(trb, spec)
            bound = gradient_bound(cb) * hs_norm(gradient(spec, trb.VT))
        excess = max(excess, g.norm() - bound * (1 + 1e-12))
    ok_bound = excess <= 0.0

    dyson_half = _dyson_worst(0.5, rng)
    dyson_one = _dyson_worst(1.0, rng)
    ok_dyson = dyson_one <= 1e-8 and dyson_half <= 1e-8
    verdict(8, ok_adj and ok_taylor and ok_bound and ok_dyson,
            f"adjoint refinement ratios {np.round(ratios, 3).tolist()} (need >= 3.5); "
            f"Taylor ratios {min(taylor):.3f}..{max(taylor):.3f} (expect 4); gradient bound excess {excess:.1e}; "
            f"order-8 Dyson error {dyson_half:.1e} at |H|T=0.5 and {dyson_one:.1e} at |H|T=1 (tol 1e-8)")


def test_criterion_9_dynamical_inertia_transfer():
    cp = ControlProblem(SZ, SX + 0.5 * np.eye(2), 5.0, 200)
    W = hadamard()
    ws = analyze_weight(np.eye(2))
    spec = LandscapeSpec("F", W, ws)
    rows, ok = [], True
    for nu in [(0,), (1,), (2,)]:
        s = ca.sample_point(ws, nu, "F", W, seed=11)
        warm = synthesize_gate(cp, LandscapeSpec.make("G", s.point), 0.1 * np.random.default_rng(2).normal(size=200),
                               max_iter=500, tau_value=1e-6)
        fld, _ = refine_to_target(cp, warm.terminal, s.point)
        traj = propagate(cp, fld)
        dist = hs_norm(traj.VT - s.point)
        r = dynamical_hessian_inertia(traj, spec)
        kin = s.stratum.inertia
        good = dist <= 1e-8 and (r.n_neg, r.n_pos) == (kin[0], kin[2]) and r.rank == 4
        ok &= good
        rows.append(f"{nu}: |V_T - U*| {dist:.1e}, dynamical (-,+) {(r.n_neg, r.n_pos)}, kinematic {kin}")
    verdict(9, ok, "; ".join(rows))


def test_criterion_10_trap_freeness_and_synthesis():
    W = haar_unitary(3, np.random.default_rng(10))
    spec = LandscapeSpec.make("F", W, np.eye(3))
    finals = []
    for seed in range(100):
        U0 = haar_unitary(3, np.random.default_rng(1000 + seed))
        tr = flow_kinematic(spec, U0, max_iter=5000, seed=seed)
        finals.append(tr.final_value)
    worst = max(finals)
    cp = ControlProblem(SZ, SX, 10.0, 200)
    syn = synthesize_gate(cp, LandscapeSpec.make("GP", hadamard()), cp.zero_field(), max_iter=500, tau_value=1e-4)
    ok = worst <= 1e-8 and syn.status == CONVERGED and syn.final_value <= 1e-4 and syn.iterations <= 500
    verdict(10, ok, f"100 flows worst final value {worst:.1e} (tol 1e-8); Hadamard synthesis J_GP "
                    f"{syn.final_value:.1e} after {syn.iterations} iterations")
