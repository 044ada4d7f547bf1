"""Compressed sensing with bipartite expander graphs.

Measurement matrices are adjacency matrices of unbalanced bipartite
expanders; k-sparse signals are recovered from y = A x by simple
identical-gap iterations, and almost-k-sparse signals by support
identification plus restricted least squares.
"""

from ._kernels import available_backends, backend_name, use_backend
from .bench import TrialReport, TrialSpec, emit_report, run_sweep
from .decode import (
    DecodeTrace,
    GapState,
    TraceRow,
    brute_force_decode,
    build_gap_state,
    candidate_update,
    decode_fast,
    decode_majority,
    verify_solution,
)
from .errors import (
    AmbiguousSolutionError,
    BudgetExceededError,
    DimensionMismatchError,
    ExpanderCSError,
    FileFormatError,
    GenerationError,
    InadmissibleModelError,
    InvalidParametersError,
    ParseError,
    ValidationError,
)
from .graph import (
    BipartiteGraph,
    ExpansionReport,
    check_expansion,
    gen_random_graph,
    gen_right_regular_graph,
    load_graph,
    save_graph,
    suggest_params,
)
from .robust import (
    AlmostSparseModel,
    RiprCertificate,
    RobustResult,
    ThresholdSchedule,
    decode_robust_support,
    gen_almost_sparse,
    least_squares_refine,
    ripr_error_bound,
    robust_pipeline,
)
from .sketch import (
    Sketch,
    SparseSignal,
    encode,
    load_signal,
    load_sketch,
    nullspace_sparse_search,
    rip1_bounds,
    save_signal,
    save_sketch,
)

__version__ = "0.1.0"
