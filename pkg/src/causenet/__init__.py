"""Discrete Bayesian networks over ranked survey data.

Pipeline: binarize survey records, build a DAG from an architecture of
variable-type pairs with occurrence filters, fit CPTs by smoothed maximum
likelihood, answer diagnostic/predictive queries by exact enumeration or
Gibbs sampling, and cross-validate with threshold and ranking metrics.
"""

from .dataset import (
    BinaryDataset,
    ContextFactor,
    DatasetError,
    DegenerateFactorError,
    DiscretizationSpec,
    ParseError,
    Schema,
    SchemaError,
    SurveyRecord,
    Triple,
    ValidationError,
    VariableDescriptor,
    binarize,
    build_variables,
    fit_discretization,
    from_samples,
    load_raw,
    weighted_count,
)
from .graph import (
    ArchitectureSpec,
    Dag,
    DIAGNOSTIC,
    PREDICTIVE,
    UseCase,
    build_edges,
    build_graph,
    enforce_parent_cap,
    export_dot,
    predefined_architecture,
    select_nodes,
)
from .inference import (
    BayesianNetwork,
    Cpt,
    FitMeta,
    ImpossibleEvidenceError,
    InferenceError,
    PosteriorReport,
    SamplerConfig,
    SizeGuardError,
    baseline_predict,
    fit_mle,
    infer,
    infer_exact,
    infer_gibbs,
    joint_probability,
    log_likelihood,
    predict_ranking,
    sample_assignments,
)
from .evaluation import (
    DatasetSource,
    EvaluationError,
    EvaluationReport,
    FoldPlan,
    RankingMetrics,
    ThresholdMetrics,
    ranking_metrics,
    run_cross_validation,
    split_folds,
    threshold_metrics,
)
from .registry import Model, Registry

__version__ = "0.1.0"
