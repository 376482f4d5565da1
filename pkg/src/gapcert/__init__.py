"""Numerical certification of singular value gap growth for free group
representations, with boundary limit maps and dominated splittings."""

__version__ = "0.1.0"

from .config import RunConfig, load_config, parse_config
from .domination import (
    CERTIFIED,
    INCONCLUSIVE,
    REFUTED,
    CertifyOptions,
    DominationCertificate,
    certify,
)
from .errors import (
    BudgetError,
    ConfigError,
    EmptySubsetError,
    GapcertError,
    HypothesesFailError,
    InsufficientSampleError,
    MembershipError,
    NoConvergenceError,
    NoGapError,
    NonTransverseSeedError,
    NotCertifiedError,
    ParseError,
    SingularBlockError,
    ValidationError,
)
from .flow import (
    BlockMap,
    FlowMarginCurve,
    InvariantSection,
    ShiftPoint,
    SplittingReport,
    SplittingSample,
    StabilityTable,
    anosov_margins,
    bg_splitting,
    cocycle,
    graph_transform,
    invariant_section,
    orbit_block_maps,
    shift,
    shift_point,
    splitting_checks,
    stability_probe,
)
from .limits import (
    ConvergenceCurve,
    DiscontinuityProbe,
    HolderFit,
    LimitMapValue,
    TransversalityTable,
    cartan_check,
    cauchy_constant,
    discontinuity_probe,
    holder_estimate,
    pair_in_subset,
    point_in_forward_set,
    sdp_check,
    transversality_table,
    xi_lower,
    xi_upper,
)
from .linalg import (
    Representation,
    ScaledMatrix,
    Subspace,
    apply_to_subspace,
    evaluate,
    gap_margin,
    grassmann_distance,
    s_dk,
    singular_values,
    transversality_gap,
    u_k,
)
from .report import Report, exit_code, reproduce_paper, run
from .subsets import (
    AxisFamily,
    Directed,
    FullBoundary,
    GammaPSample,
    Primitive,
    SubsetPSpec,
    gamma_p_plus,
    hat,
    word_in_positive_set,
)
from .words import (
    BoundaryPoint,
    Letter,
    ReducedWord,
    geodesic_through,
    parse_boundary_point,
    parse_letter,
    parse_word,
    periodic_point,
    translate,
)

__all__ = [
    "__version__",
    # words
    "Letter",
    "ReducedWord",
    "BoundaryPoint",
    "parse_letter",
    "parse_word",
    "parse_boundary_point",
    "periodic_point",
    "translate",
    "geodesic_through",
    # subsets
    "SubsetPSpec",
    "FullBoundary",
    "Directed",
    "AxisFamily",
    "Primitive",
    "GammaPSample",
    "gamma_p_plus",
    "hat",
    "word_in_positive_set",
    # linalg
    "Representation",
    "ScaledMatrix",
    "Subspace",
    "evaluate",
    "singular_values",
    "gap_margin",
    "grassmann_distance",
    "transversality_gap",
    "apply_to_subspace",
    "u_k",
    "s_dk",
    # domination
    "certify",
    "CertifyOptions",
    "DominationCertificate",
    "CERTIFIED",
    "REFUTED",
    "INCONCLUSIVE",
    # limit maps
    "xi_upper",
    "xi_lower",
    "LimitMapValue",
    "point_in_forward_set",
    "pair_in_subset",
    "cauchy_constant",
    "transversality_table",
    "TransversalityTable",
    "sdp_check",
    "ConvergenceCurve",
    "cartan_check",
    "holder_estimate",
    "HolderFit",
    "discontinuity_probe",
    "DiscontinuityProbe",
    # flow
    "ShiftPoint",
    "shift_point",
    "shift",
    "cocycle",
    "anosov_margins",
    "FlowMarginCurve",
    "bg_splitting",
    "SplittingSample",
    "splitting_checks",
    "SplittingReport",
    "BlockMap",
    "graph_transform",
    "orbit_block_maps",
    "invariant_section",
    "InvariantSection",
    "stability_probe",
    "StabilityTable",
    # config / report
    "RunConfig",
    "load_config",
    "parse_config",
    "Report",
    "run",
    "exit_code",
    "reproduce_paper",
    # errors
    "GapcertError",
    "MembershipError",
    "NoGapError",
    "NoConvergenceError",
    "NotCertifiedError",
    "NonTransverseSeedError",
    "InsufficientSampleError",
    "EmptySubsetError",
    "BudgetError",
    "HypothesesFailError",
    "SingularBlockError",
    "ConfigError",
    "ParseError",
    "ValidationError",
]
