"""Gradient descent on U(N) and on control fields.

Both loops use a backtracking Armijo line search.  Kinematic flows move along
geodesics U exp(-s U^dag grad); field descent moves the slice samples along the
negative L2 gradient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import critical_atlas
from .dynamics import (
    ControlField,
    ControlProblem,
    dV_matrix,
    dynamical_gradient,
    propagate,
)
from .landscapes import LandscapeSpec, gradient, value
from .matgeom import check_unitary, hs_norm, principal_log, random_tangent, retract, skew_basis

CONVERGED = "converged"
MAX_ITERATIONS = "maxIterations"
SADDLE_STALLED = "saddleStalled"
LINE_SEARCH_FAILED = "lineSearchFailed"


@dataclass(frozen=True)
class StepRule:
    """Backtracking line search: try ``s``, multiply by ``shrink`` until the Armijo test passes.

    After an accepted step the next trial step is the accepted one times ``grow``.
    ``initial=None`` selects the default seed of the calling routine.
    """

    initial: float | None = None
    shrink: float = 0.5
    armijo: float = 1e-4
    grow: float = 2.0
    max_backtracks: int = 60
    max_step: float = math.inf

    def __post_init__(self):
        if not 0 < self.shrink < 1:
            raise ValueError("shrink must lie in (0, 1)")
        if not 0 < self.armijo < 1:
            raise ValueError("armijo constant must lie in (0, 1)")
        if self.grow < 1:
            raise ValueError("grow must be at least 1")
        if self.initial is not None and not self.initial > 0:
            raise ValueError("initial step must be positive")


@dataclass
class FlowTrace:
    iterates: list[tuple[int, float, float]] = field(default_factory=list)
    terminal: np.ndarray | ControlField | None = None
    status: str = MAX_ITERATIONS
    matched_stratum: object | None = None
    kicks: list[int] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return self.iterates[-1][0] if self.iterates else 0

    @property
    def final_value(self) -> float:
        return self.iterates[-1][1]

    @property
    def final_gradient_norm(self) -> float:
        return self.iterates[-1][2]

    def is_monotone(self) -> bool:
        """Values never increase across accepted steps (steps right after a kick are excluded)."""
        kicked = set(self.kicks)
        return all(b[1] <= a[1] for a, b in zip(self.iterates, self.iterates[1:]) if b[0] not in kicked)

    def records(self) -> list[str]:
        return [f"{it} {v:.17g} {g:.17g}" for it, v, g in self.iterates]


def _line_search(f0: float, slope: float, s: float, rule: StepRule, trial: Callable[[float], tuple[float, object]]):
    """Return (s, value, state) of the first step passing the Armijo test, or None."""
    for _ in range(rule.max_backtracks + 1):
        f1, state = trial(s)
        if f1 <= f0 - rule.armijo * s * slope:
            return s, f1, state
        s *= rule.shrink
    return None


def match_stratum(spec: LandscapeSpec, val: float, tau_match: float):
    """Nearest critical stratum (kinds F and P) whose value lies within ``tau_match``."""
    if spec.kind not in ("F", "P"):
        return None
    strata = critical_atlas.enumerate_strata(spec.weight, spec.kind)
    best = min(strata, key=lambda s: abs(s.critical_value - val))
    return best if abs(best.critical_value - val) <= tau_match else None


def flow_kinematic(spec: LandscapeSpec, U0: np.ndarray, step: StepRule | None = None, max_iter: int = 2000,
                   tau_grad: float = 1e-9, tau_match: float | None = None, seed=None,
                   escape_saddles: bool = True, stall_window: int = 50, max_kicks: int = 3,
                   kick_norm: float = 1e-3) -> FlowTrace:
    """Descend J along geodesics from U0 until ||grad J|| <= tau_grad.

    Near a saddle (gradient below 10 tau_grad while the value stays above
    tau_match) for ``stall_window`` iterations, a random tangent kick of norm
    ``kick_norm`` is applied, at most ``max_kicks`` times.
    """
    step = step or StepRule()
    U = check_unitary(U0)
    tau_match = 1e-6 * spec.scale if tau_match is None else tau_match
    s = step.initial if step.initial is not None else 1.0 / (spec.weight.norm_sq if spec.weight is not None else 1.0)
    rng = np.random.default_rng(seed)
    trace = FlowTrace()
    f = value(spec, U)
    stall = 0
    it = 0
    while True:
        g = gradient(spec, U)
        gn = hs_norm(g)
        trace.iterates.append((it, f, gn))
        near_saddle = escape_saddles and gn < 10 * tau_grad and f > tau_match
        stall = stall + 1 if near_saddle else 0
        if gn <= tau_grad and not near_saddle:
            trace.status = CONVERGED
            break
        if near_saddle and (stall >= stall_window or gn <= tau_grad):
            if len(trace.kicks) >= max_kicks:
                trace.status = SADDLE_STALLED
                break
            U = retract(U, random_tangent(U, rng, kick_norm))
            f = value(spec, U)
            it += 1
            trace.kicks.append(it)
            stall = 0
            continue
        if it >= max_iter:
            trace.status = MAX_ITERATIONS
            break
        found = _line_search(f, gn * gn, s, step, lambda t: _geodesic_trial(spec, U, g, t))
        if found is None:
            trace.status = LINE_SEARCH_FAILED
            break
        s, f, U = found
        s = min(s * step.grow, step.max_step)
        it += 1
    trace.terminal = U
    trace.matched_stratum = match_stratum(spec, f, tau_match)
    return trace


def _geodesic_trial(spec: LandscapeSpec, U: np.ndarray, g: np.ndarray, t: float):
    U1 = retract(U, -g, t)
    return value(spec, U1), U1


def default_field_step(cp: ControlProblem) -> float:
    """hbar^2 / (T ||mu||^2)."""
    return cp.hbar ** 2 / (cp.T * hs_norm(cp.mu) ** 2)


def synthesize_gate(cp: ControlProblem, spec: LandscapeSpec, field0: ControlField | np.ndarray,
                    step: StepRule | None = None, max_iter: int = 500, tau_value: float = 1e-4,
                    tau_grad: float = 0.0) -> FlowTrace:
    """Gradient descent on the slice samples of E for J(V_T(E)).

    Stops as soon as the value is at most ``tau_value`` (converged), when the
    field gradient norm drops to ``tau_grad``, or after ``max_iter`` steps.
    """
    step = step or StepRule()
    fld = field0 if isinstance(field0, ControlField) else cp.field(field0)
    s = step.initial if step.initial is not None else default_field_step(cp)
    traj = propagate(cp, fld)
    f = value(spec, traj.VT)
    trace = FlowTrace()
    it = 0
    while True:
        g = dynamical_gradient(traj, spec)
        gn = g.norm()
        trace.iterates.append((it, f, gn))
        if f <= tau_value:
            trace.status = CONVERGED
            break
        if gn <= tau_grad:
            trace.status = CONVERGED if f <= tau_value else SADDLE_STALLED
            break
        if it >= max_iter:
            trace.status = MAX_ITERATIONS
            break

        def trial(t: float, fld=fld, g=g):
            tr = propagate(cp, fld - t * g)
            return value(spec, tr.VT), tr

        found = _line_search(f, gn * gn, s, step, trial)
        if found is None:
            trace.status = LINE_SEARCH_FAILED
            break
        s, f, traj = found
        fld = traj.field
        s = min(s * step.grow, step.max_step)
        it += 1
    trace.terminal = fld
    return trace


def refine_to_target(cp: ControlProblem, field0: ControlField | np.ndarray, target: np.ndarray,
                     tol: float = 1e-13, max_iter: int = 30) -> tuple[ControlField, float]:
    """Gauss-Newton polish of a field so that V_T reaches ``target``.

    Solves min ||d|| subject to the linearized condition dV_T(d) = V_T log(V_T^dag target)
    in frame coordinates; converges quadratically from a good warm start.
    Returns the field and the final geodesic distance ||log(V_T^dag target)||.
    """
    fld = field0 if isinstance(field0, ControlField) else cp.field(field0)
    basis = skew_basis(cp.N)
    dist = math.inf
    for _ in range(max_iter):
        traj = propagate(cp, fld)
        L = principal_log(traj.VT.conj().T @ target, warn=False)
        dist = hs_norm(L)
        if dist <= tol:
            break
        r = np.array([np.vdot(E, L).real for E in basis])
        J = dV_matrix(traj)
        d = np.linalg.lstsq(J, r, rcond=None)[0]
        fld = fld + ControlField(d, cp.T)
    return fld, dist
