"""Coded caching with per-user distortion targets: optimal schemes, closed
forms, converse bounds, and a bit-exact delivery simulator."""

from .baselines import baseline_load, oca_split, pca_split
from .bounds import BoundReport, cutset_budget, cutset_fixed, cutset_k3
from .closed_form import (
    TDecomposition,
    corner_points,
    lemma1_load,
    simplified_budget_solve,
    t_decomposition,
    theorem1_load,
    threshold_allocation,
)
from .lp_core import (
    LinearProgram,
    LpSolution,
    LpStatus,
    SolverError,
    format_lp,
    solve_lp,
)
from .model import (
    Budget,
    FixedMemories,
    InstanceError,
    MemoryAllocation,
    ProblemInstance,
    RateProfile,
    instance_from_dict,
    load_instance,
    make_rate_profile,
    rho,
    rho_inverse,
    validate_instance,
)
from .scheme_lp import (
    SchemeSolution,
    UserSet,
    VariableIndex,
    build_intra_layer,
    build_intra_restricted,
    build_o1,
    build_o2,
    extract_scheme,
    make_variable_index,
    scheme_problems,
    served_user,
)
from .simulator import (
    CacheContents,
    FileLibrary,
    QuantizedScheme,
    SimulationError,
    TransmissionLog,
    VerificationReport,
    audit_delivery,
    decode,
    deliver,
    make_library,
    place,
    quantize,
    verify,
)

__all__ = [
    "BoundReport",
    "Budget",
    "CacheContents",
    "FileLibrary",
    "FixedMemories",
    "InstanceError",
    "LinearProgram",
    "LpSolution",
    "LpStatus",
    "MemoryAllocation",
    "ProblemInstance",
    "QuantizedScheme",
    "RateProfile",
    "SchemeSolution",
    "SimulationError",
    "SolverError",
    "TDecomposition",
    "TransmissionLog",
    "UserSet",
    "VariableIndex",
    "VerificationReport",
    "audit_delivery",
    "baseline_load",
    "build_intra_layer",
    "build_intra_restricted",
    "build_o1",
    "build_o2",
    "corner_points",
    "cutset_budget",
    "cutset_fixed",
    "cutset_k3",
    "decode",
    "deliver",
    "extract_scheme",
    "format_lp",
    "instance_from_dict",
    "lemma1_load",
    "load_instance",
    "make_library",
    "make_rate_profile",
    "make_variable_index",
    "oca_split",
    "pca_split",
    "place",
    "quantize",
    "rho",
    "rho_inverse",
    "scheme_problems",
    "served_user",
    "simplified_budget_solve",
    "solve_lp",
    "t_decomposition",
    "theorem1_load",
    "threshold_allocation",
    "validate_instance",
    "verify",
]

__version__ = "0.1.0"
