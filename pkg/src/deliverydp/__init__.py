"""Exact dynamic programming for delivery slot pricing in attended home delivery."""

from .analysis import (
    AnalysisReport,
    AssumptionReport,
    ContractionCertificate,
    ImproperPolicyError,
    analyze,
    auxiliary_dp,
    contraction_check,
    fixed_point,
    fixed_point_residual,
    running_ratios,
    validate_assumptions,
    weighted_norm,
)
from .concavity import (
    EnclosingCombination,
    ExtensibilityReport,
    check_concavity_preservation,
    concave_closure_eval,
    extensibility_margin,
    f_hessian_check,
    lambda_bound,
)
from .dp import (
    BackupResult,
    ValueFunction,
    apply_operator,
    backup_state,
    inner_objective,
    solve_horizon,
    terminal_value,
)
from .grid import StateGrid
from .instances import table1
from .model import (
    CLOSED,
    ChoiceProbabilities,
    ConfigError,
    CostModel,
    ProblemInstance,
    evaluate_cost,
    load_config,
    mnl_probabilities,
    parse_config,
    price_from_probability,
)

__version__ = "0.1.0"
