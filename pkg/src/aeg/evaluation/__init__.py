from .metrics import (
    GroundTruth,
    metric_aed,
    metric_akl,
    metric_alh,
    metric_ndcg,
    metric_r2,
)
from .synthetic import (
    SyntheticSpec,
    circular_true_model,
    generate_point_queries,
    pointify_to_gaussian_queries,
    synthesize_corpus,
)
from .harness import (
    AffectiveFold,
    BaseRateFold,
    CrossValidationReport,
    FoldDiagnostics,
    PersonalizationReport,
    RetrievalReport,
    run_cross_validation,
    run_personalization_eval,
    run_retrieval_eval,
)

__all__ = [
    "GroundTruth",
    "metric_akl",
    "metric_aed",
    "metric_r2",
    "metric_alh",
    "metric_ndcg",
    "SyntheticSpec",
    "circular_true_model",
    "synthesize_corpus",
    "generate_point_queries",
    "pointify_to_gaussian_queries",
    "AffectiveFold",
    "BaseRateFold",
    "CrossValidationReport",
    "FoldDiagnostics",
    "PersonalizationReport",
    "RetrievalReport",
    "run_cross_validation",
    "run_personalization_eval",
    "run_retrieval_eval",
]
