"""Command-line front end.

Subcommands: ``strata``, ``verify``, ``flow``, ``synth``, ``maxset``.  Options
can also come from a plain-text config file (``--config``) made of ``key value``
lines grouped under optional ``[section]`` headers; flags override the file.

Exit codes: 0 success, 1 a check or run failed, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import math
import sys
import zlib
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import critical_atlas as ca
from .dynamics import (
    ControlProblem,
    adjoint_residual,
    dV_matrix,
    propagate,
)
from .errors import ConfigError, LandscapeError
from .fileio import FormatError, dumps_field, dumps_matrix, read_field, read_matrix
from .gates import PAULI, named_gate
from .landscapes import (
    KINDS,
    LandscapeSpec,
    adjoint_rep_value,
    gradient,
    hessian_operator,
    projective_branch,
    value,
)
from .matgeom import (
    analyze_weight,
    check_unitary,
    dag,
    haar_unitary,
    hs_norm,
    inner,
    near_cut_locus,
    random_tangent,
    retract,
    skew_part,
)
from .optimize import StepRule, flow_kinematic, synthesize_gate

COMMANDS = ("strata", "verify", "flow", "synth", "maxset")

# key -> (converter name, default)
KEYS: dict[str, tuple[str, object]] = {
    "N": ("int", None),
    "A": ("words", None),
    "W": ("words", ["random"]),
    "kind": ("str", "F"),
    "seed": ("int", 0),
    "tau_cluster": ("float", 1e-8),
    "tau_crit": ("float", 1e-9),
    "tau_null": ("float", None),
    "tau_grad": ("float", 1e-9),
    "tau_match": ("float", None),
    "tau_value": ("float", 1e-4),
    "max_iter": ("int", 500),
    "step_initial": ("float", None),
    "step_shrink": ("float", 0.5),
    "step_armijo": ("float", 1e-4),
    "step_grow": ("float", 2.0),
    "U0": ("words", ["random"]),
    "H0": ("words", None),
    "mu": ("words", None),
    "T": ("float", None),
    "m": ("int", None),
    "hbar": ("float", 1.0),
    "field0": ("words", ["zero"]),
    "samples": ("int", 20),
    "output": ("str", None),
    "terminal": ("str", None),
}


class UsageError(ConfigError):
    pass


def subsystem_rng(seed: int, name: str) -> np.random.Generator:
    """Independent generator for a named subsystem derived from the single config seed."""
    return np.random.default_rng([int(seed), zlib.crc32(name.encode())])


def parse_config_text(text: str) -> dict[str, list[str]]:
    """Parse ``key value...`` lines; ``[section]`` headers only group keys."""
    out: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        ln = raw.split("#", 1)[0].strip()
        if not ln:
            continue
        if ln.startswith("[") and ln.endswith("]"):
            continue
        parts = ln.split()
        key = parts[0].replace("-", "_")
        if key not in KEYS:
            raise ConfigError(key, f"unknown key on line {lineno}")
        if len(parts) < 2:
            raise ConfigError(key, f"missing value on line {lineno}")
        out[key] = parts[1:]
    return out


def _convert(key: str, words: list[str]):
    kind = KEYS[key][0]
    if kind == "words":
        return list(words)
    if len(words) != 1:
        raise ConfigError(key, f"expected a single value, got {' '.join(words)!r}")
    w = words[0]
    try:
        if kind == "int":
            return int(w)
        if kind == "float":
            x = float(w)
            if not math.isfinite(x):
                raise ValueError
            return x
    except ValueError:
        raise ConfigError(key, f"cannot parse {w!r} as {kind}") from None
    return w


@dataclass
class ExperimentConfig:
    command: str
    values: dict[str, object] = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values.get(key, KEYS[key][1])

    def rng(self, name: str) -> np.random.Generator:
        return subsystem_rng(self["seed"], name)

    # -- sources ----------------------------------------------------------

    def weight_matrix(self) -> np.ndarray | None:
        src = self["A"]
        if src is None:
            return None
        N = self["N"]
        head, rest = src[0], src[1:]
        if head == "identity":
            return np.eye(self._need_N("A"), dtype=complex)
        if head == "projector":
            n = self._need_N("A")
            if len(rest) != 1:
                raise ConfigError("A", "projector needs a rank")
            r = _convert_int("A", rest[0])
            if not 0 <= r <= n:
                raise ConfigError("A", f"projector rank {r} outside [0, {n}]")
            return np.diag([1.0] * r + [0.0] * (n - r)).astype(complex)
        if head == "diagonal":
            try:
                vals = [float(v) for v in ",".join(rest).split(",") if v]
            except ValueError:
                raise ConfigError("A", f"bad diagonal list {' '.join(rest)!r}") from None
            if not vals:
                raise ConfigError("A", "empty diagonal list")
            if N is not None and N != len(vals):
                raise ConfigError("N", f"N = {N} but the diagonal has {len(vals)} entries")
            return np.diag(vals).astype(complex)
        if head == "random":
            n = self._need_N("A")
            seed = _convert_int("A", rest[0]) if rest else self["seed"]
            r = subsystem_rng(seed, "A")
            return (r.standard_normal((n, n)) + 1j * r.standard_normal((n, n))) / np.sqrt(2.0)
        if head == "file":
            if len(rest) != 1:
                raise ConfigError("A", "file source needs a path")
            return self._matrix_file("A", rest[0])
        raise ConfigError("A", f"unknown source {head!r}")

    def _need_N(self, key: str) -> int:
        N = self["N"]
        if N is None:
            raise ConfigError("N", f"required by the {key} source")
        if N < 1:
            raise ConfigError("N", "must be positive")
        return N

    def _matrix_file(self, key: str, path: str) -> np.ndarray:
        p = Path(path)
        if not p.exists():
            raise ConfigError(key, f"file {path} does not exist")
        try:
            M = read_matrix(p)
        except FormatError as exc:
            raise ConfigError(key, f"{path}: {exc}") from None
        if self["N"] is not None and M.shape[0] != self["N"]:
            raise ConfigError(key, f"{path} has dimension {M.shape[0]}, N = {self['N']}")
        return M

    def dimension(self) -> int:
        """N from the weight source, the N key, or a fixed-size target, in that order."""
        A = self.weight_matrix()
        if A is not None:
            return A.shape[0]
        if self["N"] is not None:
            return self._need_N("N")
        head, rest = self["W"][0], self["W"][1:]
        if head in ("hadamard", "cnot"):
            return named_gate(head).shape[0]
        if head == "file" and len(rest) == 1:
            return self._matrix_file("W", rest[0]).shape[0]
        raise ConfigError("N", "cannot infer the dimension; give N, A or a fixed-size target")

    def target(self, N: int) -> np.ndarray:
        src = self["W"]
        head, rest = src[0], src[1:]
        if head == "file":
            if len(rest) != 1:
                raise ConfigError("W", "file source needs a path")
            W = self._matrix_file("W", rest[0])
        elif head in ("hadamard", "cnot", "qft", "identity", "random"):
            seed = _convert_int("W", rest[0]) if (head == "random" and rest) else self["seed"]
            try:
                W = named_gate(head, N, subsystem_rng(seed, "W"))
            except LandscapeError as exc:
                raise ConfigError("W", str(exc)) from None
        else:
            raise ConfigError("W", f"unknown target {head!r}")
        if W.shape[0] != N:
            raise ConfigError("W", f"dimension {W.shape[0]} != {N}")
        try:
            return check_unitary(W, 1e-8)
        except LandscapeError as exc:
            raise ConfigError("W", str(exc)) from None

    def landscape(self) -> LandscapeSpec:
        kind = self["kind"]
        if kind not in KINDS:
            raise ConfigError("kind", f"must be one of {', '.join(KINDS)}")
        A = self.weight_matrix()
        N = self.dimension()
        W = self.target(N)
        if kind in ("F", "P"):
            A = np.eye(N, dtype=complex) if A is None else A
            return LandscapeSpec(kind, W, analyze_weight(A, self["tau_cluster"]))
        if A is not None and not np.allclose(A, np.eye(N)):
            raise ConfigError("A", f"kind {kind} takes no weight")
        return LandscapeSpec(kind, W)

    def step_rule(self) -> StepRule:
        try:
            return StepRule(self["step_initial"], self["step_shrink"], self["step_armijo"], self["step_grow"])
        except ValueError as exc:
            raise ConfigError("step", str(exc)) from None

    def operator(self, key: str, N: int) -> np.ndarray:
        src = self[key]
        if src is None:
            raise ConfigError(key, "required for this command")
        if src[0] in PAULI:
            if N != 2:
                raise ConfigError(key, "Pauli matrices need N = 2")
            M = PAULI[src[0]].copy()
            if len(src) == 2:
                M = M + _shift(key, src[1]) * np.eye(2)
            return M
        if src[0] == "file" and len(src) == 2:
            return self._matrix_file(key, src[1])
        raise ConfigError(key, f"expected a Pauli name or 'file <path>', got {' '.join(src)!r}")

    def control_problem(self, N: int) -> ControlProblem:
        H0, mu = self.operator("H0", N), self.operator("mu", N)
        T, m = self["T"], self["m"]
        if T is None or T <= 0:
            raise ConfigError("T", "a positive horizon is required")
        if m is None or m < 1:
            raise ConfigError("m", "a positive slice count is required")
        try:
            return ControlProblem(H0, mu, T, m, self["hbar"])
        except ValueError as exc:
            raise ConfigError("H0", str(exc)) from None

    def initial_field(self, cp: ControlProblem):
        src = self["field0"]
        if src[0] == "zero":
            return cp.zero_field()
        if src[0] == "random":
            scale = float(src[1]) if len(src) > 1 else 0.1
            return cp.field(scale * self.rng("field0").standard_normal(cp.slices))
        if src[0] == "file" and len(src) == 2:
            try:
                T, samples = read_field(src[1])
            except (OSError, FormatError) as exc:
                raise ConfigError("field0", str(exc)) from None
            if len(samples) != cp.slices or abs(T - cp.T) > 1e-12 * cp.T:
                raise ConfigError("field0", "field file does not match T and m")
            return cp.field(samples)
        raise ConfigError("field0", f"unknown source {' '.join(src)!r}")


def _shift(key: str, w: str) -> float:
    try:
        x = float(w)
    except ValueError:
        x = math.nan
    if not math.isfinite(x):
        raise ConfigError(key, f"cannot parse identity shift {w!r}")
    return x


def _convert_int(key: str, w: str) -> int:
    try:
        return int(w)
    except ValueError:
        raise ConfigError(key, f"cannot parse {w!r} as int") from None


# -- reports ---------------------------------------------------------------

class Report:
    def __init__(self, command: str):
        stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        self.header = f"# unitary-landscapes {command} generated {stamp}"
        self.lines: list[str] = []

    def columns(self, *names: str) -> None:
        self.lines.append("# columns: " + " ".join(names))

    def add(self, *items) -> None:
        self.lines.append(" ".join(_fmt(x) for x in items))

    def text(self) -> str:
        return "\n".join([self.header] + self.lines) + "\n"


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    if isinstance(x, tuple):
        return "(" + ",".join(str(v) for v in x) + ")"
    return str(x)


def run_strata(cfg: ExperimentConfig) -> tuple[Report, int]:
    spec = cfg.landscape()
    if spec.kind not in ("F", "P"):
        raise ConfigError("kind", "strata requires kind F or P")
    ws = spec.weight
    rep = Report("strata")
    rep.add("# weight", "N", ws.N, "clusters", ws.distinct, "mult", ws.mult, "null", ws.null_mult)
    rep.columns("signature", "kind", "value", "dimension", "n_neg", "n_zero", "n_pos", "class")
    for st in ca.enumerate_strata(ws, spec.kind):
        if isinstance(st, ca.GlobalMaxDescriptor):
            rep.add("maxset", st.kind, st.critical_value, f"codim{st.codimension}", "-", "-", "-", st.cls,
                    "nondegenerate", st.nondegenerate)
        else:
            rep.add(st.signature, st.kind, st.critical_value, st.dimension, *st.inertia, st.cls)
    return rep, 0


def run_maxset(cfg: ExperimentConfig) -> tuple[Report, int]:
    A = cfg.weight_matrix()
    if A is None:
        raise ConfigError("A", "maxset needs a weight matrix")
    ws = analyze_weight(A, cfg["tau_cluster"])
    rep = Report("maxset")
    rep.columns("signature", "trace")
    for nu in ca.signatures(ws):
        rep.add(nu, ca.lambda_trace(ws, nu))
    rep.add("nondegenerate", ca.jp_globalmax_nondegenerate(ws))
    return rep, 0


def _fd_check(spec: LandscapeSpec, U: np.ndarray, rng: np.random.Generator, h: float = 1e-6) -> float:
    dU = random_tangent(U, rng, 1.0)
    fd = (value(spec, retract(U, dU, h)) - value(spec, retract(U, dU, -h))) / (2 * h)
    an = inner(gradient(spec, U), dU)
    return abs(fd - an) / max(1.0, abs(an), hs_norm(gradient(spec, U)))


def run_verify(cfg: ExperimentConfig) -> tuple[Report, int]:
    spec = cfg.landscape()
    N = spec.N
    rep = Report("verify")
    rep.columns("check", "status", "residual", "tolerance")
    results: list[bool] = []

    def record(name: str, resid: float, tol: float, ok: bool | None = None) -> None:
        ok = bool(resid <= tol) if ok is None else ok
        results.append(ok)
        rep.add(name, "pass" if ok else "fail", f"{resid:.3e}", f"{tol:.1e}")

    rng = cfg.rng("verify")
    samples = cfg["samples"]
    A = spec.weight.A if spec.weight is not None else np.eye(N, dtype=complex)
    for kind in KINDS:
        s = LandscapeSpec.make(kind, spec.W, A if kind in ("F", "P") else None)
        worst = 0.0
        for _ in range(samples):
            U = haar_unitary(N, rng)
            if kind in ("G", "GP") and _near_cut(s, U):
                continue
            worst = max(worst, _fd_check(s, U, rng))
        record(f"gradient_fd_{kind}", worst, 1e-5)

    worst = 0.0
    for _ in range(samples):
        U = haar_unitary(N, rng)
        sP = LandscapeSpec.make("P", spec.W, A)
        worst = max(worst, abs(adjoint_rep_value(A, spec.W, U) - 2 * value(sP, U)) / max(1.0, sP.scale))
    record("oracle_adjoint_rep_P", worst, 1e-9)

    worst = 0.0
    sF = LandscapeSpec.make("F", spec.W, A)
    G = A @ dag(A)
    for _ in range(samples):
        U = haar_unitary(N, rng)
        trace_form = 2 * np.trace(G).real - 2 * np.trace(G @ dag(spec.W) @ U).real
        worst = max(worst, abs(value(sF, U) - trace_form) / sF.scale)
    record("oracle_trace_form_F", worst, 1e-10)

    sG = LandscapeSpec.make("G", spec.W)
    worst = 0.0
    for _ in range(samples):
        U = haar_unitary(N, rng)
        worst = max(worst, abs(hs_norm(gradient(sG, U)) ** 2 - 2 * value(sG, U)))
    record("gradient_norm_identity_G", worst, 1e-10)

    if spec.kind in ("F", "P"):
        ws = spec.weight
        srng = cfg.rng("strata")
        for st in ca.enumerate_strata(ws, spec.kind, include_max_set=False):
            tag = "-".join(str(v) for v in st.signature)
            try:
                smp = ca.sample_point(ws, st.signature, spec.kind, spec.W, srng, tau_crit=max(cfg["tau_crit"], 1e-9))
            except LandscapeError:
                record(f"sample_{tag}", math.inf, 0.0)
                continue
            ev = np.linalg.eigvalsh(hessian_operator(smp.spec, smp.point))
            closed = ca.expand(ca.hessian_spectrum(ws, st.signature, spec.kind))
            record(f"spectrum_{tag}", float(np.max(np.abs(ev - closed))) / smp.spec.scale, 1e-8)
            mb = ca.morse_bott_check(smp, cfg["tau_null"])
            if mb.inconclusive:
                rep.add(f"morse_bott_{tag}", "inconclusive", f"{mb.min_nonzero_gamma:.3e}", f"{mb.tau_null:.1e}")
            else:
                record(f"morse_bott_{tag}", abs(mb.nullity - mb.dim_formula), 0)

    cp = _verify_problem(cfg, N)
    drng = cfg.rng("dynamics")
    Y = skew_part(drng.standard_normal((N, N)) + 1j * drng.standard_normal((N, N)))
    f0 = drng.standard_normal(cp.slices)
    d0 = drng.standard_normal(cp.slices)
    tr = propagate(cp, f0)
    record("adjoint_exact", adjoint_residual(tr, tr.VT @ Y, cp.field(d0), "exact"), 1e-10)
    r1 = adjoint_residual(tr, tr.VT @ Y, cp.field(d0))
    cp2 = cp.with_slices(2 * cp.slices)
    tr2 = propagate(cp2, np.repeat(f0, 2))
    r2 = adjoint_residual(tr2, tr2.VT @ Y, cp2.field(np.repeat(d0, 2)))
    ratio = r1 / max(r2, 1e-300)
    record("adjoint_midpoint_ratio", ratio, 3.5, ok=ratio >= 3.5)

    ok = all(results)
    rep.add("# summary", "pass" if ok else "fail", f"{sum(results)}/{len(results)}")
    return rep, 0 if ok else 1


def _near_cut(spec: LandscapeSpec, U: np.ndarray) -> bool:
    """True when U is too close to the (projective) cut locus for a finite-difference check."""
    if spec.kind == "G":
        return near_cut_locus(dag(U) @ spec.W, 1e-4)
    vals = np.sort(projective_branch(U, spec.W).values)
    return len(vals) > 1 and vals[1] - vals[0] < 1e-4


def _verify_problem(cfg: ExperimentConfig, N: int) -> ControlProblem:
    if cfg["H0"] is not None:
        return cfg.control_problem(N)
    r = cfg.rng("control")
    H0 = r.standard_normal((N, N)) + 1j * r.standard_normal((N, N))
    mu = r.standard_normal((N, N)) + 1j * r.standard_normal((N, N))
    H0, mu = H0 + dag(H0), mu + dag(mu)
    return ControlProblem(H0 / hs_norm(H0), mu / hs_norm(mu), 1.0, 50)


def run_flow(cfg: ExperimentConfig) -> tuple[Report, int]:
    spec = cfg.landscape()
    src = cfg["U0"]
    if src[0] == "random":
        U0 = haar_unitary(spec.N, cfg.rng("U0"))
    elif src[0] == "target":
        U0 = spec.W
    elif src[0] == "file" and len(src) == 2:
        U0 = cfg._matrix_file("U0", src[1])
    else:
        raise ConfigError("U0", f"unknown source {' '.join(src)!r}")
    tr = flow_kinematic(spec, U0, cfg.step_rule(), cfg["max_iter"], cfg["tau_grad"], cfg["tau_match"],
                        seed=cfg.rng("kicks"))
    rep = Report("flow")
    rep.columns("iteration", "value", "grad_norm")
    rep.lines += tr.records()
    matched = "-"
    if tr.matched_stratum is not None:
        matched = getattr(tr.matched_stratum, "signature", "maxset")
    rep.add("# summary", "status", tr.status, "final", f"{tr.final_value:.6e}", "iterations", tr.iterations,
            "stratum", matched, "kicks", len(tr.kicks))
    if cfg["terminal"]:
        Path(cfg["terminal"]).write_text(dumps_matrix(tr.terminal))
    return rep, 0 if tr.status == "converged" else 1


def run_synth(cfg: ExperimentConfig) -> tuple[Report, int]:
    spec = cfg.landscape()
    N = spec.N
    cp = cfg.control_problem(N)
    rep = Report("synth")
    fld = cfg.initial_field(cp)
    if cp.slices < N * N:
        rep.add("# rank", "deficient", "m", cp.slices, "required", N * N)
        rep.add("# summary", "status", "rankDeficient")
        return rep, 1
    sv = np.linalg.svd(dV_matrix(propagate(cp, fld)), compute_uv=False)
    rep.add("# rank", int(np.sum(sv > 1e-8 * sv[0])), "of", N * N)
    tr = synthesize_gate(cp, spec, fld, cfg.step_rule(), cfg["max_iter"], cfg["tau_value"])
    rep.columns("iteration", "value", "grad_norm")
    rep.lines += tr.records()
    rep.add("# summary", "status", tr.status, "final", f"{tr.final_value:.6e}", "iterations", tr.iterations)
    if cfg["terminal"]:
        Path(cfg["terminal"]).write_text(dumps_field(cp.T, tr.terminal.samples))
    return rep, 0 if tr.status == "converged" else 1


RUNNERS = {
    "strata": run_strata,
    "verify": run_verify,
    "flow": run_flow,
    "synth": run_synth,
    "maxset": run_maxset,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError("arguments", message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="unitary-landscapes", description="Critical strata, checks, flows and gate synthesis on U(N).")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for cmd in COMMANDS:
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", help="config file of 'key value' lines")
        for key, (kind, _) in KEYS.items():
            flag = "--" + key.replace("_", "-")
            if kind == "words":
                sp.add_argument(flag, dest=key, nargs="+")
            else:
                sp.add_argument(flag, dest=key)
    return p


def load_config(argv: list[str] | None) -> ExperimentConfig:
    ns = build_parser().parse_args(argv)
    values: dict[str, object] = {}
    if ns.config:
        path = Path(ns.config)
        if not path.exists():
            raise ConfigError("config", f"file {ns.config} does not exist")
        for key, words in parse_config_text(path.read_text()).items():
            values[key] = _convert(key, words)
    for key in KEYS:
        v = getattr(ns, key)
        if v is not None:
            values[key] = _convert(key, v if isinstance(v, list) else [v])
    return ExperimentConfig(ns.command, values)


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = load_config(argv)
        rep, code = RUNNERS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except LandscapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = rep.text()
    if cfg["output"]:
        Path(cfg["output"]).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
