"""Topic-weighted Gaussian emotion modeling over the valence-arousal plane.

The package covers the full pipeline: acoustic features -> topic
posteriors -> affective Gaussians -> personalization, prediction,
retrieval, evaluation, and a CLI/HTTP service around a single-file model
bundle.
"""

from .acoustic import AcousticGMM, AcousticTrainConfig, TopicPosterior, topic_posterior, train_acoustic_gmm
from .affective import (
    AffectiveGMM,
    LearnConfig,
    Mode,
    Provenance,
    combine_hybrid,
    initialize_affective,
    learn_affective_gmm,
)
from .annotations import (
    Annotation,
    ClipAnnotationModel,
    CorpusPriors,
    EmotionCorpus,
    compute_corpus_priors,
    fit_all_clip_models,
    fit_clip_model,
)
from .bundle import ModelBundle, load_bundle, read_manifest, save_bundle
from .errors import AegError
from .features import (
    FrameMatrix,
    SegmentMatrix,
    StandardizationStats,
    aggregate_segments,
    apply_standardization,
    fit_standardization,
    pool_segments,
)
from .gaussians import Gaussian2, GaussianD, Mixture, kl_divergence, kl2, log_pdf, pdf
from .personalize import AdaptConfig, PersonalDatum, adapt_incrementally, map_adapt
from .prediction import EmotionPrediction, predict, predict_mixture, reduce_to_gaussian
from .retrieval import (
    GaussianQuery,
    IndexEntry,
    LibraryIndex,
    MatchMode,
    Method,
    PointQuery,
    PseudoSong,
    RankedList,
    build_index,
    fold_in,
    index_from_posteriors,
    rank_emotion_prediction,
    rank_ensemble,
    reindex_for_model,
    rank_folding_in,
)

__version__ = "0.1.0"

__all__ = [
    "AcousticGMM",
    "AcousticTrainConfig",
    "TopicPosterior",
    "topic_posterior",
    "train_acoustic_gmm",
    "AffectiveGMM",
    "LearnConfig",
    "Mode",
    "Provenance",
    "combine_hybrid",
    "initialize_affective",
    "learn_affective_gmm",
    "Annotation",
    "ClipAnnotationModel",
    "CorpusPriors",
    "EmotionCorpus",
    "compute_corpus_priors",
    "fit_all_clip_models",
    "fit_clip_model",
    "ModelBundle",
    "load_bundle",
    "read_manifest",
    "save_bundle",
    "AegError",
    "FrameMatrix",
    "SegmentMatrix",
    "StandardizationStats",
    "aggregate_segments",
    "apply_standardization",
    "fit_standardization",
    "pool_segments",
    "Gaussian2",
    "GaussianD",
    "Mixture",
    "kl_divergence",
    "kl2",
    "log_pdf",
    "pdf",
    "AdaptConfig",
    "PersonalDatum",
    "adapt_incrementally",
    "map_adapt",
    "EmotionPrediction",
    "predict",
    "predict_mixture",
    "reduce_to_gaussian",
    "GaussianQuery",
    "IndexEntry",
    "LibraryIndex",
    "MatchMode",
    "Method",
    "PointQuery",
    "PseudoSong",
    "RankedList",
    "build_index",
    "fold_in",
    "index_from_posteriors",
    "rank_emotion_prediction",
    "rank_ensemble",
    "reindex_for_model",
    "rank_folding_in",
    "__version__",
]
