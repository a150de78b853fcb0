"""Analogical proportions in powers, analogy-based regression and its error bounds."""
from .boolean import (
    BooleanModel,
    BooleanSample,
    BooleanTable,
    affine_distance,
    bool_analogy_holds,
    bool_confidence,
    bool_sol,
    boolean_err,
    verify_ap_affine,
)
from .core import (
    DistanceMode,
    FiniteMeasure,
    PowerProfile,
    Tolerance,
    analogy_holds,
    functional_distance,
    generalized_mean,
    q_distance,
    q_expected_value,
    sol,
    solve_power,
)
from .counterexample import algorithm1_lower_bound, indicator_f, theorem3_rhs
from .errors import AnalogyError
from .regression import (
    APModel,
    LabeledDataset,
    analogical_value,
    ap_eval,
    ap_fit,
    build_selection_map,
    check_regular,
    predict_dataset,
    root_set,
)
