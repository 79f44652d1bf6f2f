"""Evaluation harnesses: cross-validation, personalization curves, and
retrieval scoring against ground-truth annotation Gaussians.

Cross-validation pools the held-out predictions from every fold and
computes each metric once on the pooled set, which keeps R-squared
unbiased by per-fold mean shifts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..acoustic import TopicPosterior
from ..affective import AffectiveGMM, LearnConfig, Mode, learn_affective_gmm
from ..annotations import EmotionCorpus, compute_corpus_priors
from ..errors import InsufficientData, InvalidCount, ListMismatch, MissingPosterior
from ..gaussians import Gaussian2, kl2, pdf
from ..personalize import AdaptConfig, PersonalDatum, adapt_incrementally, map_adapt
from ..prediction import reduce_to_gaussian
from ..retrieval import (
    GaussianQuery,
    LibraryIndex,
    MatchMode,
    PointQuery,
    Query,
    fold_in,
    rank_emotion_prediction,
    rank_ensemble,
    rank_folding_in,
)
from .metrics import GroundTruth, metric_aed, metric_akl, metric_alh, metric_ndcg


@dataclass(frozen=True)
class FoldDiagnostics:
    fold: int
    n_train: int
    n_test: int
    lbound_trace: Tuple[float, ...] = ()
    removed_topics: frozenset = frozenset()


@dataclass(frozen=True)
class CrossValidationReport:
    metrics: Mapping[str, float]
    folds: Tuple[FoldDiagnostics, ...]
    predictions: Mapping[str, Gaussian2]

    def __post_init__(self):
        object.__setattr__(self, "metrics", dict(self.metrics))
        object.__setattr__(self, "predictions", dict(self.predictions))


@dataclass(frozen=True)
class PersonalizationReport:
    batch_sizes: Tuple[int, ...]
    alh_curve: Tuple[float, ...]
    mean_distance_curve: Tuple[float, ...]
    baseline_alh: float
    baseline_mean_distance: float


@dataclass(frozen=True)
class RetrievalReport:
    """method name -> cutoff P -> mean NDCG over the query set."""

    ndcg: Mapping[str, Mapping[int, float]]
    n_queries: int

    def __post_init__(self):
        object.__setattr__(
            self, "ndcg", {m: dict(v) for m, v in self.ndcg.items()}
        )


class AffectiveFold:
    """Trains the affective Gaussians on a fold and predicts via the
    single-Gaussian reduction."""

    def __init__(self, train_corpus: EmotionCorpus,
                 train_thetas: Mapping[str, TopicPosterior],
                 config: LearnConfig = LearnConfig()):
        priors = None
        if config.mode is Mode.ANNOPRIOR:
            priors = compute_corpus_priors(train_corpus)
        self.model, trace = learn_affective_gmm(train_thetas, train_corpus, priors, config)
        self.lbound_trace = tuple(trace)
        self.removed_topics = self.model.removed_topics

    def predict(self, theta: TopicPosterior) -> Gaussian2:
        return reduce_to_gaussian(theta, self.model)


class BaseRateFold:
    """Constant predictor: global training annotation mean/covariance."""

    def __init__(self, train_corpus: EmotionCorpus,
                 train_thetas: Mapping[str, TopicPosterior] = None,
                 config: LearnConfig = None):
        pts = np.array([ann.e for ann in train_corpus.annotations])
        mean = pts.mean(axis=0)
        diff = pts - mean
        cov = diff.T @ diff / pts.shape[0]
        cov = 0.5 * (cov + cov.T)
        if np.min(np.linalg.eigvalsh(cov)) < 1e-6:
            cov = cov + 1e-3 * np.eye(2)
        self.gaussian = Gaussian2(mean, cov)

    def predict(self, theta: TopicPosterior) -> Gaussian2:
        return self.gaussian


FoldFactory = Callable[[EmotionCorpus, Mapping[str, TopicPosterior], LearnConfig], object]


def run_cross_validation(
    corpus: EmotionCorpus,
    thetas: Mapping[str, TopicPosterior],
    folds: int = 3,
    config: LearnConfig = LearnConfig(),
    seed: int = 0,
    fold_factory: FoldFactory = AffectiveFold,
) -> CrossValidationReport:
    """Seeded k-fold split over clips; every clip is predicted exactly
    once by a model that never saw it; metrics computed on the pooled
    prediction set.
    """
    if folds < 2:
        raise InvalidCount("need at least 2 folds")
    if len(corpus) < folds:
        raise InsufficientData(f"{len(corpus)} clips cannot fill {folds} folds")
    missing = [cid for cid in corpus.clip_ids if cid not in thetas]
    if missing:
        raise MissingPosterior(f"clips without topic posteriors: {missing[:5]}")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(corpus))
    parts = np.array_split(order, folds)
    clip_ids = list(corpus.clip_ids)

    predictions: Dict[str, Gaussian2] = {}
    diagnostics: List[FoldDiagnostics] = []
    for f, part in enumerate(parts):
        test_ids = {clip_ids[i] for i in part}
        train_ids = [cid for cid in clip_ids if cid not in test_ids]
        train_corpus = EmotionCorpus(
            [ann for cid in train_ids for ann in corpus.clip_annotations(cid)]
        )
        train_thetas = {cid: thetas[cid] for cid in train_ids}
        fold_model = fold_factory(train_corpus, train_thetas, config)
        for cid in sorted(test_ids):
            predictions[cid] = fold_model.predict(thetas[cid])
        diagnostics.append(
            FoldDiagnostics(
                fold=f,
                n_train=len(train_ids),
                n_test=len(test_ids),
                lbound_trace=tuple(getattr(fold_model, "lbound_trace", ())),
                removed_topics=frozenset(getattr(fold_model, "removed_topics", ())),
            )
        )

    truth = GroundTruth.from_corpus(corpus)
    ordered = list(corpus.clip_ids)
    pred_means = np.array([predictions[cid].mean for cid in ordered])
    true_means = np.array([truth.mean(cid) for cid in ordered])
    from .metrics import metric_r2

    metrics = {
        "akl": metric_akl(predictions, truth),
        "aed": metric_aed(predictions, truth),
        "r2_valence": metric_r2(pred_means[:, 0], true_means[:, 0]),
        "r2_arousal": metric_r2(pred_means[:, 1], true_means[:, 1]),
    }
    return CrossValidationReport(
        metrics=metrics, folds=tuple(diagnostics), predictions=predictions
    )


def _draw_personal_data(
    user_truth: AffectiveGMM,
    n: int,
    dirichlet_alpha: float,
    rng: np.random.Generator,
    id_prefix: str,
) -> List[PersonalDatum]:
    k = user_truth.n_components
    chols = np.linalg.cholesky(user_truth.covs)
    data: List[PersonalDatum] = []
    for i in range(n):
        theta = rng.dirichlet(np.full(k, dirichlet_alpha))
        full = np.zeros(user_truth.k_original)
        full[list(user_truth.topic_indices)] = theta
        c = int(rng.choice(k, p=theta))
        e = user_truth.means[c] + chols[c] @ rng.standard_normal(2)
        tp = TopicPosterior(clip_id=f"{id_prefix}_{i:04d}", theta=full)
        data.append(PersonalDatum(theta=tp, e=e))
    return data


def _mean_distance_to_truth(adapted: AffectiveGMM, user_truth: AffectiveGMM) -> float:
    """Mean Euclidean distance between component means, matched by topic
    index over the shared surviving topics."""
    shared = [t for t in adapted.topic_indices if t in set(user_truth.topic_indices)]
    dists = []
    for t in shared:
        a = adapted.means[adapted.topic_indices.index(t)]
        b = user_truth.means[user_truth.topic_indices.index(t)]
        dists.append(float(np.linalg.norm(a - b)))
    return float(np.mean(dists))


def run_personalization_eval(
    background: AffectiveGMM,
    user_truth: AffectiveGMM,
    batch_sizes: Sequence[int] = (10, 20, 30, 40, 50),
    heldout: int = 200,
    dirichlet_alpha: float = 0.3,
    seed: int = 0,
    config: AdaptConfig = AdaptConfig(),
    cumulative: bool = True,
) -> PersonalizationReport:
    """Personalization curve against a synthetic user.

    The user's perception is a known shifted model; personal and held-out
    data are drawn from it. At each batch size the adapted model is scored
    by held-out ALH and by the mean distance between adapted and true
    component means. Cumulative mode re-adapts the background with the
    first n annotations at every step; online mode chains adaptations over
    consecutive batches.
    """
    if len(batch_sizes) == 0:
        raise InvalidCount("need at least one batch size")
    sizes = [int(n) for n in batch_sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])) or sizes[0] < 1:
        raise InvalidCount("batch sizes must be positive and strictly increasing")

    rng = np.random.default_rng(seed)
    pool = _draw_personal_data(user_truth, sizes[-1], dirichlet_alpha, rng, "personal")
    held = _draw_personal_data(user_truth, heldout, dirichlet_alpha, rng, "heldout")
    held_points = [d.e for d in held]

    def alh_of(model: AffectiveGMM) -> float:
        preds = [reduce_to_gaussian(d.theta, model) for d in held]
        return metric_alh(preds, held_points)

    if cumulative:
        steps = [map_adapt(background, pool[:n], config) for n in sizes]
    else:
        chunks = [pool[a:b] for a, b in zip([0] + sizes[:-1], sizes)]
        steps = adapt_incrementally(background, chunks, config)

    return PersonalizationReport(
        batch_sizes=tuple(sizes),
        alh_curve=tuple(alh_of(m) for m in steps),
        mean_distance_curve=tuple(_mean_distance_to_truth(m, user_truth) for m in steps),
        baseline_alh=alh_of(background),
        baseline_mean_distance=_mean_distance_to_truth(background, user_truth),
    )


def _relevance_for(q: Query, truth: GroundTruth) -> Dict[str, float]:
    if isinstance(q, PointQuery):
        return {cid: pdf(q.e, truth.gaussian(cid)) for cid in truth.clip_ids}
    return {cid: float(np.exp(-kl2(q.g, truth.gaussian(cid)))) for cid in truth.clip_ids}


def run_retrieval_eval(
    index: LibraryIndex,
    queries: Sequence[Query],
    truth: GroundTruth,
    p_values: Sequence[int] = (5, 10, 20, 30),
    seed: int = 0,
    fold_iters: int = 3,
    mode: MatchMode = MatchMode.SINGLE_GAUSSIAN,
) -> RetrievalReport:
    """Mean NDCG@P per method over a query set.

    Relevance of a clip is the likelihood of a point query under the
    clip's ground-truth Gaussian, or exp(-KL2) for a Gaussian query. The
    random baseline draws one seeded permutation per query index.
    """
    if set(index.clip_ids()) != set(truth.clip_ids):
        raise ListMismatch("index and truth cover different clips")
    if len(queries) == 0:
        raise InvalidCount("no queries")
    methods = ("emotion_prediction", "folding_in", "ensemble", "random")
    sums = {m: {p: 0.0 for p in p_values} for m in methods}
    all_ids = index.clip_ids()
    for qi, q in enumerate(queries):
        relevance = _relevance_for(q, truth)
        ep = rank_emotion_prediction(q, index, mode)
        pseudo = fold_in(q, index.affective, iters=fold_iters)
        fi = rank_folding_in(pseudo, index)
        ens = rank_ensemble(ep, fi)
        rng_q = np.random.default_rng([seed, qi])
        random_ids = [all_ids[i] for i in rng_q.permutation(len(all_ids))]
        ranked = {
            "emotion_prediction": ep,
            "folding_in": fi,
            "ensemble": ens,
            "random": random_ids,
        }
        for m in methods:
            for p in p_values:
                sums[m][p] += metric_ndcg(ranked[m], relevance, p)
    n = len(queries)
    return RetrievalReport(
        ndcg={m: {p: sums[m][p] / n for p in p_values} for m in methods},
        n_queries=n,
    )
