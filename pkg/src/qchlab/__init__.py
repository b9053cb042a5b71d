"""qchlab: directed graphs carrying quantum channels — verification and algebra.

The package represents finite directed graphs whose vertices carry
finite-dimensional state spaces and whose edges carry completely positive
maps.  It verifies the graph-channel framework conditions, the partial-isometry
graph relations, and the causal-history axioms, and constructs the operator
algebra generated by vertex projections and edge Kraus operators, including
its block decomposition.
"""

from .algebra import (
    CKFamily,
    GeneratedAlgebra,
    af_filtration_check,
    block_decomposition,
    check_ck_family,
    ck_to_channels,
    generate_algebra,
    kraus_choice_invariance,
)
from .causal import (
    AcausalSet,
    CausalGraph,
    causal_relation,
    detect_ctc,
    interval,
    is_acausal,
    is_complete_future,
    is_complete_pair,
    is_complete_past,
)
from .channel import (
    KrausChannel,
    Superoperator,
    apply,
    choi,
    choi_distance,
    compose,
    dual,
    embed,
    is_completely_positive,
    is_trace_preserving,
    is_unital,
    kraus_equivalence,
    kraus_from_choi,
    reduce_map,
)
from .circuit import CircuitSpec, circuit_to_qch, parse_circuit
from .errors import QCHLabError
from .qch import (
    CompletePair,
    DeclaredFuture,
    QCHInstance,
    check_composition,
    check_extension,
    check_spacelike_commutativity,
    is_star_homomorphism,
    synthesize_pair_maps,
    validate_qch,
    verify_complete_pair_reductions,
)
from .report import Report, Tolerances

__version__ = "0.1.0"
