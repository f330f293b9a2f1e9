"""Cuntz-Krieger operators of stationary 0-1 Bratteli diagrams, checked exactly at finite depth."""

from .admissible import (
    AdmissibleMap,
    find_admissible,
    invariant_compat,
    is_admissible,
    markov_compat,
    path_map,
    stationary_compat,
)
from .diagram import (
    CoupledGraph,
    EdgeTable,
    NonNegIntMatrix,
    ZeroOneMatrix,
    build_edge_table,
    coupled_graph,
    is_primitive,
    is_strongly_connected,
    linked_pairs,
    path_words,
    to_dot,
    zero_one_reduction,
)
from .errors import (
    CKBError,
    CKDecompositionError,
    InputParseError,
    InvalidDiagramError,
    InvalidMeasureError,
    NotAdmissibleError,
    NotInDomainError,
    NotLinkedError,
    NotPrimitiveError,
    NotSaturatedError,
)
from .exact import Surd
from .measure import (
    InvariantMeasure,
    MarkovSequence,
    PerronData,
    StationaryMarkov,
    Vertex,
    cylinder_measure,
    invariant_as_markov,
    invariant_measure,
    level_consistency,
    perron_data,
    q_vectors,
    quasi_stationarity_check,
    rn_sigma_e,
    validate_spec,
)
from .representation import (
    LevelOperator,
    LevelSpace,
    MonicSystem,
    ck_verify_edge,
    ck_verify_vertex,
    edge_operator,
    inclusion,
    intertwiner,
    level_space,
    monic_equivalence,
    monic_from_measure,
    monic_operators,
    operator_consistency,
    vertex_operator,
)
from .sfs import (
    SemibranchingSystem,
    ck_condition,
    edge_sfs,
    refinement_check,
    saturation_check,
    vertex_sfs,
    word_translate,
)

__version__ = "0.1.0"
