"""Fuglede-Kadison determinants on discretized equivalence relations.

A library plus CLI for assembling operators T = sum(M_{f_i} L_{g_i}) from
measure-preserving partial injections on an N-cell grid, computing their
Fuglede-Kadison determinant spectrally, and comparing against the exact
closed forms that hold under checkable hypotheses.
"""

__version__ = "0.1.0"

from .grid import (
    CellFunction,
    CellSet,
    DiscreteSpace,
    compose_with_inverse,
    ess_sup_abs,
    integrate,
    log_abs_integral,
    measure,
    pointwise,
)
from .partials import (
    GeneratorFamily,
    PartialInjection,
    Word,
    compose,
    evaluate_word,
    family,
    fixed_point_set,
    invert,
    is_ergodic_finite,
    make_interval_exchange,
    make_rotation,
    make_table,
    orbits,
    reduce_word,
    restrict,
    saturate,
    treeing_diagnostics,
    treeing_girth,
)
from .operators import (
    DenseOperator,
    NormalTerm,
    OperatorExpr,
    adjoint,
    assemble,
    matmul,
    matrix_of_mult,
    matrix_of_translation,
    normal_form_power,
    op_norm_upper_bound,
    operator_expr,
    shift,
    trace,
    trace_of_term,
)
from .spectral import (
    FKResult,
    SpectrumResult,
    fk_determinant,
    hermitian_eigen,
    log_abs_det_lu,
    singular_values,
    spectral_radius_estimate,
)
from .oracles import (
    HypothesisReport,
    TheoremComparison,
    check_anchored_contraction,
    check_disjoint_partition,
    closed_form_anchored,
    closed_form_disjoint_partition,
    gram_structure_check,
    shifted_unit_check,
    trace_vanishing_profile,
)
from .scenarios import ScenarioConfig, instantiate, parse_scenario
from .runner import RunReport, run_scenario

__all__ = [name for name in dir() if not name.startswith("_")]
