"""Graph-based semi-supervised learning with labeled-set balancing.

The package builds kNN affinity graphs, grows imbalanced labeled sets by
iterative nearest-neighborhood oversampling, propagates labels with
harmonic (GFHF) or local-and-global-consistency (LGC) solvers, and ships
a benchmark harness plus CLI that reports accuracy sweeps as CSV and
figures.
"""

from .datasets import (
    Dataset,
    LabeledSplit,
    load_csv_dataset,
    load_idx_mnist,
    make_two_moons,
    sample_labeled_split,
    subsample_per_class,
)
from .errors import ConfigError, DataError, GbsslError, NumericalError
from .graph import Graph, LaplacianBundle, build_knn_graph, laplacians, rbf_weight
from .harness import (
    ExperimentConfig,
    ResultRow,
    RunOutcome,
    emit_csv,
    run_demo,
    run_single,
    sweep_imbalance,
    sweep_k,
    sweep_s,
)
from .inno import (
    InnoEvent,
    InnoResult,
    LabelState,
    best_candidate,
    find_minority_class,
    imbalance_variance,
    inno_balance,
)
from .metrics import ConfusionMatrix, confusion, overall_accuracy
from .propagation import (
    ScoreMatrix,
    build_label_matrix,
    cmn_adjust,
    gfhf_propagate,
    lgc_iterate,
    lgc_propagate,
    predict,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConfusionMatrix",
    "DataError",
    "Dataset",
    "ExperimentConfig",
    "GbsslError",
    "Graph",
    "InnoEvent",
    "InnoResult",
    "LabelState",
    "LabeledSplit",
    "LaplacianBundle",
    "NumericalError",
    "ResultRow",
    "RunOutcome",
    "ScoreMatrix",
    "best_candidate",
    "build_knn_graph",
    "build_label_matrix",
    "cmn_adjust",
    "confusion",
    "emit_csv",
    "find_minority_class",
    "gfhf_propagate",
    "imbalance_variance",
    "inno_balance",
    "laplacians",
    "lgc_iterate",
    "lgc_propagate",
    "load_csv_dataset",
    "load_idx_mnist",
    "make_two_moons",
    "overall_accuracy",
    "predict",
    "rbf_weight",
    "run_demo",
    "run_single",
    "sample_labeled_split",
    "subsample_per_class",
    "sweep_imbalance",
    "sweep_k",
    "sweep_s",
]
