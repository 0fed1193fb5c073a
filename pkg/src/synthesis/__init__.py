"""LMI-based robust H2 synthesis of the distance-control gains."""

from .design import (
    DEFAULT_INTEGRATOR_WEIGHT,
    DEFAULT_Q,
    DEFAULT_R,
    SynthesisSolution,
    VerificationReport,
    augment_integrator,
    closed_loop_radii,
    default_performance,
    integral_performance,
    solve_sdp,
    spectral_radius,
    synthesize,
    synthesize_integral,
    verify_solution,
)
from .gains_file import GainsFileError, GainsRecord, load_gains, save_gains
from .lmi import STRICT_MARGIN, DimensionError, LmiBlock, PerformanceSpec, SdpProblem, VariableLayout, build_lmis, sym_sqrt
from .solver import SdpResult, SynthesisError, minimize

__all__ = [
    "DEFAULT_INTEGRATOR_WEIGHT",
    "DEFAULT_Q",
    "DEFAULT_R",
    "STRICT_MARGIN",
    "DimensionError",
    "GainsFileError",
    "GainsRecord",
    "LmiBlock",
    "PerformanceSpec",
    "SdpProblem",
    "SdpResult",
    "SynthesisError",
    "SynthesisSolution",
    "VariableLayout",
    "VerificationReport",
    "augment_integrator",
    "build_lmis",
    "closed_loop_radii",
    "default_performance",
    "integral_performance",
    "load_gains",
    "minimize",
    "save_gains",
    "solve_sdp",
    "spectral_radius",
    "sym_sqrt",
    "synthesize",
    "synthesize_integral",
    "verify_solution",
]
