"""Exact transport flows on metric graphs and their asymptotic periodicity."""
__version__ = "0.1.0"

from .graph import (
    Edge,
    GraphSpec,
    IncidenceMatrices,
    InvalidGraphError,
    ValidationReport,
    Violation,
    adjacency,
    build_operators,
    disjoint_union,
    example_g2,
    example_g3,
    incidence_matrices,
    is_strongly_connected,
    require_valid,
    validate_graph,
)
from .operator import ColumnStochasticOperator, SparseColumns
from .stepfunc import EdgeStepFunction, Piecewise, l1_norm, linf_norm
from .spectral import (
    AttractorCertificate,
    ConvergenceError,
    ReducibleOperatorError,
    SpectralDecomposition,
    attractor_weights,
    cyclic_classes,
    find_attractor,
    imprimitivity_index,
    is_irreducible,
    spectral_projection,
)
from .flow import (
    EigenflowResult,
    ExpStepFunction,
    PeriodicityReport,
    ResolventResult,
    defect,
    eigenflow_check,
    evaluate_T,
    periodicity_report,
    resolvent,
)
from .velocity import (
    SubdivisionMap,
    conjugated_evaluate_TC,
    minimal_multiplier,
    subdivide,
    velocity_adjacency,
)
from .measure import (
    EdgeMeasure,
    TestFunction,
    embed,
    evaluate_S,
    multiply,
    nilpotent_shift,
    pair,
    restrict,
    shift,
    variation,
    weakstar_continuity_probe,
)
from .templates import GraphTemplate, random_graph, template_names, truncate, wrap_edges
