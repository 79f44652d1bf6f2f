"""Prediction and retrieval quality metrics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Mapping, Sequence, Union

import numpy as np

from ..annotations import Annotation, ClipAnnotationModel, EmotionCorpus, fit_all_clip_models
from ..errors import DegenerateTruth, EmptyInput, InvalidCutoff, ListMismatch
from ..gaussians import Gaussian2, kl2, pdf
from ..retrieval import RankedList


@dataclass(frozen=True)
class GroundTruth:
    """Per-clip annotation Gaussians plus the raw annotation lists."""

    clip_models: Mapping[str, ClipAnnotationModel]
    raw: Mapping[str, tuple] = None

    def __post_init__(self):
        if not self.clip_models:
            raise EmptyInput("ground truth covers no clips")
        object.__setattr__(self, "clip_models", dict(self.clip_models))
        object.__setattr__(self, "raw", dict(self.raw) if self.raw else {})

    @classmethod
    def from_corpus(cls, corpus: EmotionCorpus) -> "GroundTruth":
        return cls(
            clip_models=fit_all_clip_models(corpus),
            raw={cid: corpus.clip_annotations(cid) for cid in corpus.clip_ids},
        )

    @property
    def clip_ids(self):
        return tuple(self.clip_models)

    def gaussian(self, clip_id: str) -> Gaussian2:
        return self.clip_models[clip_id].gaussian()

    def mean(self, clip_id: str) -> np.ndarray:
        return self.clip_models[clip_id].a


def _check_clip_sets(preds: Mapping[str, Gaussian2], truth: GroundTruth):
    if set(preds) != set(truth.clip_models):
        raise ListMismatch("prediction and truth clip sets differ")


def metric_akl(preds: Mapping[str, Gaussian2], truth: GroundTruth) -> float:
    """Mean symmetric KL divergence between each clip's ground-truth
    Gaussian and its prediction. Lower is better.
    """
    _check_clip_sets(preds, truth)
    return float(np.mean([kl2(truth.gaussian(cid), preds[cid]) for cid in preds]))


def metric_aed(preds: Mapping[str, Gaussian2], truth: GroundTruth) -> float:
    """Mean Euclidean distance between annotation means and predicted
    means. Lower is better.
    """
    _check_clip_sets(preds, truth)
    return float(
        np.mean([np.linalg.norm(truth.mean(cid) - preds[cid].mean) for cid in preds])
    )


def metric_r2(pred_values: Sequence[float], truth_values: Sequence[float]) -> float:
    """Coefficient of determination; 1 for a perfect fit, 0 for the
    constant-mean predictor, negative for worse-than-mean predictions.
    """
    y_hat = np.asarray(pred_values, dtype=np.float64).reshape(-1)
    y = np.asarray(truth_values, dtype=np.float64).reshape(-1)
    if y_hat.shape[0] == 0:
        raise EmptyInput("no values to score")
    if y_hat.shape != y.shape:
        raise ListMismatch(f"length mismatch: {y_hat.shape[0]} vs {y.shape[0]}")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 0:
        raise DegenerateTruth("truth values have zero variance")
    ss_res = float(np.sum((y_hat - y) ** 2))
    return 1.0 - ss_res / ss_tot


def metric_alh(preds: Sequence[Gaussian2], truth_points: Sequence) -> float:
    """Mean likelihood of each ground-truth point under its predicted
    Gaussian. Larger is better.
    """
    if len(preds) != len(truth_points):
        raise ListMismatch("prediction and point counts differ")
    if len(preds) == 0:
        raise EmptyInput("no predictions to score")
    return float(np.mean([pdf(e, g) for g, e in zip(preds, truth_points)]))


def _dcg(relevances: Sequence[float], p: int) -> float:
    total = relevances[0]
    for i in range(2, p + 1):
        total += relevances[i - 1] / math.log2(i)
    return total


def metric_ndcg(
    ranked: Union[RankedList, Sequence[str]],
    relevance: Mapping[str, float],
    p: int,
) -> float:
    """Normalized discounted cumulative gain over the top ``p`` items.

    The normalizer comes from the ideal (descending-relevance) ordering of
    the same item set, so the ideal ranking scores exactly 1. When every
    relevance is zero the ordering carries no information and the score is
    defined as 1.
    """
    ids = ranked.clip_ids() if isinstance(ranked, RankedList) else list(ranked)
    if p < 1 or p > len(ids):
        raise InvalidCutoff(f"P={p} outside [1, {len(ids)}]")
    rel = [float(relevance[c]) for c in ids]
    if any(r < 0 for r in rel):
        raise EmptyInput("relevances must be nonnegative")
    ideal = sorted(rel, reverse=True)
    z = _dcg(ideal, p)
    if z <= 0:
        return 1.0
    return _dcg(rel, p) / z
