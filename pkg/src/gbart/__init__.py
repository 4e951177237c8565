"""Grouped Bayesian additive regression trees.

A sum-of-trees sampler whose trees can be restricted to disjoint variable
groups, a greedy interaction search that discovers such a grouping from
validation error, synthetic and CSV data handling, and a cross-validated
benchmark harness.
"""

from .bench import (
    BenchmarkPlan,
    DatasetSpec,
    ResultRow,
    ResultTable,
    evaluate_method,
    load_plan,
    parse_dataset_spec,
    parse_plan,
    run_benchmark,
)
from .cli import cli_main
from .data import (
    Dataset,
    FoldSpec,
    case_dimension,
    generate_synthetic,
    kfold_split,
    load_csv,
    synthetic_signal,
    train_val_split,
)
from .errors import (
    CsvParseError,
    CsvSchemaError,
    DegenerateResponseError,
    GbartError,
    GroupViolationError,
    InsufficientDataError,
    InvalidCaseError,
    InvalidFoldError,
    InvalidInputError,
    InvalidMoveError,
    InvalidPartitionError,
)
from .grouping import (
    GroupSearchConfig,
    Partition,
    RoundRecord,
    SearchTrace,
    bart_fit,
    fit_grouped,
    gbart_fit,
    isg_search,
    stage_two_seed,
)
from .sampler import (
    MIN_LEAF_SIZE,
    ChainDiagnostics,
    ChainState,
    Ensemble,
    FitResult,
    McmcConfig,
    ResponseTransform,
    audit_fit_cache,
    calibrate_lambda,
    leaf_log_marginal,
    load_model,
    mh_tree_update,
    model_from_json,
    model_to_json,
    predict,
    run_chain,
    run_chain_with_state,
    sample_leaf_values,
    sample_sigma,
    save_model,
    scale_response,
)
from .seeding import child_seed
from .trees import (
    Change,
    Grow,
    Internal,
    Leaf,
    Prune,
    RegressionTree,
    SplitRule,
    apply_move,
    evaluate,
    leaf_assignments,
    stump,
    tree_from_json,
    tree_to_json,
    tree_values,
)

__version__ = "0.1.0"

__all__ = [
    "BenchmarkPlan",
    "Change",
    "ChainDiagnostics",
    "ChainState",
    "CsvParseError",
    "CsvSchemaError",
    "Dataset",
    "DatasetSpec",
    "DegenerateResponseError",
    "Ensemble",
    "FitResult",
    "FoldSpec",
    "GbartError",
    "GroupSearchConfig",
    "GroupViolationError",
    "Grow",
    "InsufficientDataError",
    "Internal",
    "InvalidCaseError",
    "InvalidFoldError",
    "InvalidInputError",
    "InvalidMoveError",
    "InvalidPartitionError",
    "Leaf",
    "McmcConfig",
    "MIN_LEAF_SIZE",
    "Partition",
    "Prune",
    "RegressionTree",
    "ResponseTransform",
    "ResultRow",
    "ResultTable",
    "RoundRecord",
    "SearchTrace",
    "SplitRule",
    "apply_move",
    "audit_fit_cache",
    "bart_fit",
    "calibrate_lambda",
    "case_dimension",
    "child_seed",
    "cli_main",
    "evaluate",
    "evaluate_method",
    "fit_grouped",
    "gbart_fit",
    "generate_synthetic",
    "isg_search",
    "kfold_split",
    "leaf_assignments",
    "leaf_log_marginal",
    "load_csv",
    "load_model",
    "load_plan",
    "mh_tree_update",
    "model_from_json",
    "model_to_json",
    "parse_dataset_spec",
    "parse_plan",
    "predict",
    "run_benchmark",
    "run_chain",
    "run_chain_with_state",
    "sample_leaf_values",
    "sample_sigma",
    "save_model",
    "scale_response",
    "stage_two_seed",
    "stump",
    "synthetic_signal",
    "train_val_split",
    "tree_from_json",
    "tree_to_json",
    "tree_values",
]
