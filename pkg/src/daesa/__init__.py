"""Structural analysis of multimode DAE and difference-algebraic systems.

The package works on the incidence structure of a model only: which variable
occurs in which equation, and up to which differentiation or shift degree.
On top of that structure it provides bipartite matchings, the coarse and fine
Dulmage-Mendelsohn decompositions, weighted-matching offsets with their dual
certificates, index reduction, analyses of equation arrays, and the two
instants of a mode change.
"""

from .arrays import (
    ArrayRow,
    ArraySystem,
    array_index_search,
    build_array,
    build_timevarying_array,
    determines_leading_instances,
    instance_name,
)
from .errors import (
    CausalityViolation,
    InconsistentVariableUniverse,
    MatchingError,
    MixedTimeDomain,
    ModelError,
    NoCompleteMatching,
    NoEquationCompleteMatching,
    NonConvergence,
    NotCompleteMatching,
    NotDeterminedWithinBound,
    ParseError,
    StructuralAnalysisError,
    TooManyGuards,
    UndeclaredVariable,
    UnknownGuard,
)
from .existq import (
    IMMEDIATE,
    TRANSITIVE,
    ExistQuantResult,
    RolePartition,
    exist_quantif_eqn,
    variants_agree,
)
from .graph import (
    DmBlock,
    DmDecomposition,
    Matching,
    WeightedBipartiteGraph,
    direct_and_scc,
    dm_decompose,
    is_structurally_nonsingular,
    max_cardinality_matching,
    remove_overdetermined,
)
from .model import (
    CONTINUOUS,
    DISCRETE,
    GUARD_INPUT,
    SIGNAL,
    Equation,
    GuardCondition,
    Incidence,
    Model,
    Variable,
    enumerate_modes,
    euler_map,
    restrict_to_mode,
    shift_equation,
)
from .multimode import (
    ConflictReport,
    EquationOrigin,
    ModeAnalysis,
    ModeChange,
    UnfoldedSystem,
    analyze_all_modes,
    analyze_mode,
    resolve_conflicts,
    unfold_mode_change,
)
from .parser import SourceModel, parse, parse_source, pretty
from .sigma import (
    IndexReduction,
    OffsetSolution,
    find_offsets,
    find_offsets_nonsquare,
    index_reduce,
    max_weight_complete_matching,
    pantelides_offsets,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayRow",
    "ArraySystem",
    "CONTINUOUS",
    "CausalityViolation",
    "ConflictReport",
    "DISCRETE",
    "DmBlock",
    "DmDecomposition",
    "Equation",
    "EquationOrigin",
    "ExistQuantResult",
    "GUARD_INPUT",
    "GuardCondition",
    "IMMEDIATE",
    "InconsistentVariableUniverse",
    "Incidence",
    "IndexReduction",
    "Matching",
    "MatchingError",
    "MixedTimeDomain",
    "ModeAnalysis",
    "ModeChange",
    "Model",
    "ModelError",
    "NoCompleteMatching",
    "NoEquationCompleteMatching",
    "NonConvergence",
    "NotCompleteMatching",
    "NotDeterminedWithinBound",
    "OffsetSolution",
    "ParseError",
    "RolePartition",
    "SIGNAL",
    "SourceModel",
    "StructuralAnalysisError",
    "TRANSITIVE",
    "TooManyGuards",
    "UndeclaredVariable",
    "UnfoldedSystem",
    "UnknownGuard",
    "Variable",
    "WeightedBipartiteGraph",
    "analyze_all_modes",
    "analyze_mode",
    "array_index_search",
    "build_array",
    "build_timevarying_array",
    "determines_leading_instances",
    "direct_and_scc",
    "dm_decompose",
    "enumerate_modes",
    "euler_map",
    "exist_quantif_eqn",
    "find_offsets",
    "find_offsets_nonsquare",
    "index_reduce",
    "instance_name",
    "is_structurally_nonsingular",
    "max_cardinality_matching",
    "max_weight_complete_matching",
    "pantelides_offsets",
    "parse",
    "parse_source",
    "pretty",
    "remove_overdetermined",
    "resolve_conflicts",
    "restrict_to_mode",
    "shift_equation",
    "unfold_mode_change",
    "variants_agree",
]
