"""Control landscapes on the unitary group U(N).

Kinematic objectives (weighted Frobenius, phase-invariant, geodesic and
projective geodesic distances), their critical strata and Hessian spectra,
piecewise-constant Schrodinger dynamics and gradient-based gate synthesis.
"""

from .critical_atlas import (
    CriticalPointSample,
    CriticalStratum,
    GlobalMaxDescriptor,
    classify,
    enumerate_strata,
    jf_hessian_spectrum,
    jp_globalmax_nondegenerate,
    jp_hessian_spectrum,
    morse_bott_check,
    sample_point,
    stratum_inertia,
)
from .dynamics import (
    ControlField,
    ControlProblem,
    PropagatorTrajectory,
    adjoint_dV,
    dynamical_gradient,
    dynamical_hessian_inertia,
    dyson_oracle,
    frechet_dV,
    propagate,
)
from .errors import (
    ConfigError,
    CutLocusWarning,
    DimensionError,
    KindError,
    LandscapeError,
    NotCriticalError,
    NotTangentError,
    NotUnitaryError,
    RankDeficientError,
    SecularBracketError,
    SignatureError,
)
from .landscapes import LandscapeSpec, gradient, hessian_apply, hessian_matrix, value
from .matgeom import WeightSpectrum, analyze_weight, exp_skew, principal_log, retract
from .optimize import FlowTrace, StepRule, flow_kinematic, synthesize_gate

__version__ = "0.1.0"
