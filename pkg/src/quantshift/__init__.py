"""Class-prevalence quantification under dataset shift.

Three estimators (Classify & Count / CDE-Iterate, Adjusted Classify & Count,
EM maximum likelihood) evaluated either exactly against population models or
empirically against stratified Monte Carlo samples.
"""

from .classify import (
    ALWAYS_CLASS_0,
    ALWAYS_CLASS_1,
    CostPair,
    ThresholdClassifier,
    adapt_threshold,
    bayes_classifier,
    classify,
    cost_weighted_error,
    weighted_bayes_classifier,
)
from .experiment import (
    ConfigError,
    ExperimentConfig,
    ResultTable,
    emit_table,
    parse_config,
    run_experiment,
)
from .metrics import accuracy, f_measure, relative_error
from .models import (
    BinormalParams,
    DensityRatio,
    GridCdf,
    InvalidThreshold,
    PopulationModel,
    binormal_density_ratio,
    binormal_population,
    binormal_posterior,
    conditionals_from_posterior,
    marginal_density,
    posterior,
)
from .numerics import (
    Bracket,
    NonFinite,
    NoSignChange,
    QuadratureSpec,
    RngStream,
    find_root_bracketed,
    integrate_interval,
    integrate_real_line,
)
from .quantify import (
    DegenerateClassifier,
    EstimateStatus,
    Method,
    PopulationEvaluator,
    PrevalenceEstimate,
    SampleEvaluator,
    acc_estimate,
    cde_iterate,
    classify_and_count,
    em_estimate,
    fixed_point_residual,
    training_rates,
)
from .sampling import (
    EnvelopeViolation,
    LabeledDataset,
    accept_reject_sample,
    dataset_from_csv,
    dataset_to_csv,
    stratified_sample,
)
from .shift import (
    NoInteriorSolution,
    ShiftKind,
    ShiftScenario,
    covariate_shift_identity_check,
    decompose_mixture,
    make_test_population,
)

__version__ = "0.1.0"

__all__ = [
    "ALWAYS_CLASS_0",
    "ALWAYS_CLASS_1",
    "BinormalParams",
    "Bracket",
    "ConfigError",
    "CostPair",
    "DegenerateClassifier",
    "DensityRatio",
    "EnvelopeViolation",
    "EstimateStatus",
    "ExperimentConfig",
    "GridCdf",
    "InvalidThreshold",
    "LabeledDataset",
    "Method",
    "NoInteriorSolution",
    "NoSignChange",
    "NonFinite",
    "PopulationEvaluator",
    "PopulationModel",
    "PrevalenceEstimate",
    "QuadratureSpec",
    "ResultTable",
    "RngStream",
    "SampleEvaluator",
    "ShiftKind",
    "ShiftScenario",
    "ThresholdClassifier",
    "acc_estimate",
    "accept_reject_sample",
    "accuracy",
    "adapt_threshold",
    "bayes_classifier",
    "binormal_density_ratio",
    "binormal_population",
    "binormal_posterior",
    "cde_iterate",
    "classify",
    "classify_and_count",
    "conditionals_from_posterior",
    "cost_weighted_error",
    "covariate_shift_identity_check",
    "dataset_from_csv",
    "dataset_to_csv",
    "decompose_mixture",
    "em_estimate",
    "emit_table",
    "f_measure",
    "find_root_bracketed",
    "fixed_point_residual",
    "integrate_interval",
    "integrate_real_line",
    "make_test_population",
    "marginal_density",
    "parse_config",
    "posterior",
    "relative_error",
    "run_experiment",
    "stratified_sample",
    "training_rates",
]
