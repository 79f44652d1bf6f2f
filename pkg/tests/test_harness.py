"""Cross-validation plumbing, personalization curves, retrieval sweeps."""
import numpy as np
import pytest

from aeg.affective import AffectiveGMM, LearnConfig, Provenance
from aeg.errors import InsufficientData, InvalidCount, ListMismatch, MissingPosterior
from aeg.evaluation.harness import (
    AffectiveFold,
    BaseRateFold,
    run_cross_validation,
    run_personalization_eval,
    run_retrieval_eval,
)
from aeg.evaluation.metrics import GroundTruth
from aeg.evaluation.synthetic import (
    SyntheticSpec,
    circular_true_model,
    generate_point_queries,
    synthesize_corpus,
)
from aeg.personalize import AdaptConfig
from aeg.retrieval import index_from_posteriors


def _small_corpus(clips=6, seed=0):
    truth = circular_true_model(3, radius=0.6, variance=0.02)
    return synthesize_corpus(
        SyntheticSpec(truth, dirichlet_alpha=0.6, clips=clips, subjects_per_clip=8, seed=seed)
    )


def test_every_clip_predicted_exactly_once():
    corpus, thetas, _ = _small_corpus(clips=6)
    report = run_cross_validation(corpus, thetas, folds=6, config=LearnConfig(max_iters=5))
    assert set(report.predictions) == set(corpus.clip_ids)
    for d in report.folds:
        assert d.n_test == 1
        assert d.n_train == 5
        assert len(d.lbound_trace) >= 2
    assert set(report.metrics) == {"akl", "aed", "r2_valence", "r2_arousal"}


def test_oracle_fold_scores_perfectly():
    corpus, thetas, _ = _small_corpus(clips=9)
    truth = GroundTruth.from_corpus(corpus)

    class OracleFold:
        # ignores the training fold entirely; answers from ground truth
        def __init__(self, train_corpus, train_thetas, config):
            pass

        def predict(self, tp):
            return truth.gaussian(tp.clip_id)

    report = run_cross_validation(corpus, thetas, folds=3, fold_factory=OracleFold)
    assert report.metrics["akl"] < 1e-12
    assert report.metrics["aed"] < 1e-12
    assert abs(report.metrics["r2_valence"] - 1.0) < 1e-12
    assert abs(report.metrics["r2_arousal"] - 1.0) < 1e-12


def test_base_rate_fold_is_near_zero_r2(recovery_data):
    corpus, thetas, _ = recovery_data
    report = run_cross_validation(corpus, thetas, folds=3, fold_factory=BaseRateFold)
    # constant predictor: explains (almost) none of the variance
    assert abs(report.metrics["r2_valence"]) < 0.05
    assert abs(report.metrics["r2_arousal"]) < 0.05
    assert len({tuple(report.predictions[c].mean) for c in corpus.clip_ids[:20]}) <= 3


def test_cross_validation_input_errors():
    corpus, thetas, _ = _small_corpus(clips=4)
    with pytest.raises(InvalidCount):
        run_cross_validation(corpus, thetas, folds=1)
    with pytest.raises(InsufficientData):
        run_cross_validation(corpus, thetas, folds=5)
    missing = dict(thetas)
    missing.pop(corpus.clip_ids[0])
    with pytest.raises(MissingPosterior):
        run_cross_validation(corpus, missing, folds=2)


def _shifted(model: AffectiveGMM, delta) -> AffectiveGMM:
    return AffectiveGMM(
        topic_indices=model.topic_indices,
        means=model.means + np.asarray(delta),
        covs=model.covs,
        k_original=model.k_original,
        provenance=Provenance.UNIFORM,
        removed_topics=model.removed_topics,
    )


def test_personalization_improves_over_background(corner_truth):
    user = _shifted(corner_truth, [0.15, -0.1])
    report = run_personalization_eval(
        corner_truth, user, batch_sizes=(10, 30, 50), heldout=150, seed=4
    )
    assert report.batch_sizes == (10, 30, 50)
    assert len(report.alh_curve) == 3
    assert report.mean_distance_curve[-1] < report.baseline_mean_distance
    assert report.alh_curve[-1] > report.baseline_alh
    # more personal data gets closer to the user's true means
    assert report.mean_distance_curve[-1] < report.mean_distance_curve[0]


def test_personalization_batch_size_validation(corner_truth):
    user = _shifted(corner_truth, [0.1, 0.1])
    with pytest.raises(InvalidCount):
        run_personalization_eval(corner_truth, user, batch_sizes=())
    with pytest.raises(InvalidCount):
        run_personalization_eval(corner_truth, user, batch_sizes=(20, 10))
    with pytest.raises(InvalidCount):
        run_personalization_eval(corner_truth, user, batch_sizes=(0, 10))


def test_cumulative_and_online_agree_on_single_batch(corner_truth):
    user = _shifted(corner_truth, [0.2, 0.0])
    kw = dict(batch_sizes=(25,), heldout=80, seed=9, config=AdaptConfig(beta_mean=2.0))
    cum = run_personalization_eval(corner_truth, user, cumulative=True, **kw)
    onl = run_personalization_eval(corner_truth, user, cumulative=False, **kw)
    assert cum.alh_curve == onl.alh_curve
    assert cum.mean_distance_curve == onl.mean_distance_curve


def test_retrieval_report_structure(small_library):
    corpus, thetas, model = small_library
    idx = index_from_posteriors(list(thetas.values()), model)
    truth = GroundTruth.from_corpus(corpus)
    queries = generate_point_queries(12, seed=2)
    report = run_retrieval_eval(idx, queries, truth, p_values=(5, 10))
    assert report.n_queries == 12
    assert set(report.ndcg) == {"emotion_prediction", "folding_in", "ensemble", "random"}
    for m, per_p in report.ndcg.items():
        assert set(per_p) == {5, 10}
        for v in per_p.values():
            assert 0.0 <= v <= 1.0 + 1e-12


def test_single_clip_library_is_trivially_ideal():
    corpus, thetas, model = _small_corpus(clips=1)
    idx = index_from_posteriors(list(thetas.values()), model)
    truth = GroundTruth.from_corpus(corpus)
    report = run_retrieval_eval(idx, generate_point_queries(5), truth, p_values=(1,))
    for per_p in report.ndcg.values():
        assert per_p[1] == 1.0


def test_identical_clips_make_every_ordering_ideal():
    # all clips share the same annotations, so all relevances tie and the
    # random baseline is as good as anything else
    from aeg.annotations import Annotation, EmotionCorpus
    from aeg.acoustic import TopicPosterior

    model = circular_true_model(2, radius=0.4, variance=0.02)
    anns = []
    for cid in ("a", "b", "c"):
        for j, e in enumerate([(0.1, 0.1), (0.2, 0.0), (0.0, 0.2), (-0.1, 0.1)]):
            anns.append(Annotation(clip_id=cid, subject_id=f"s{j}", e=np.array(e)))
    corpus = EmotionCorpus(anns)
    thetas = [
        TopicPosterior(clip_id=cid, theta=np.array([0.5, 0.5])) for cid in ("a", "b", "c")
    ]
    idx = index_from_posteriors(thetas, model)
    truth = GroundTruth.from_corpus(corpus)
    report = run_retrieval_eval(idx, generate_point_queries(4), truth, p_values=(1, 3))
    for per_p in report.ndcg.values():
        for v in per_p.values():
            assert abs(v - 1.0) < 1e-12


def test_retrieval_eval_input_errors(small_library):
    corpus, thetas, model = small_library
    idx = index_from_posteriors(list(thetas.values()), model)
    truth = GroundTruth.from_corpus(corpus)
    with pytest.raises(InvalidCount):
        run_retrieval_eval(idx, [], truth)
    partial = GroundTruth(
        clip_models={c: GroundTruth.from_corpus(corpus).clip_models[c]
                     for c in corpus.clip_ids[:3]}
    )
    with pytest.raises(ListMismatch):
        run_retrieval_eval(idx, generate_point_queries(2), partial)


def test_random_baseline_is_seed_stable(small_library):
    corpus, thetas, model = small_library
    idx = index_from_posteriors(list(thetas.values()), model)
    truth = GroundTruth.from_corpus(corpus)
    queries = generate_point_queries(6, seed=1)
    r1 = run_retrieval_eval(idx, queries, truth, p_values=(5,), seed=3)
    r2 = run_retrieval_eval(idx, queries, truth, p_values=(5,), seed=3)
    assert r1.ndcg["random"][5] == r2.ndcg["random"][5]
