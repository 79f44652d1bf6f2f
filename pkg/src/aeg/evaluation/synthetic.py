"""Synthetic corpora drawn from a known model.

The generative story mirrors the model itself: each clip gets a topic
simplex from a Dirichlet, each subject's annotation is a draw from the
resulting topic-weighted mixture. Because the true parameters are known,
learned models can be scored by parameter recovery instead of proxy
metrics.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from ..acoustic import TopicPosterior
from ..affective import AffectiveGMM
from ..annotations import Annotation, EmotionCorpus
from ..errors import EmptyInput, InvalidCount, InvalidQueryKind
from ..retrieval import GaussianQuery, PointQuery, Query
from ..gaussians import Gaussian2


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a reproducible synthetic corpus."""

    true_affective: AffectiveGMM
    dirichlet_alpha: float = 1.0
    clips: int = 100
    subjects_per_clip: Union[int, Tuple[int, int]] = 10
    seed: int = 0

    def __post_init__(self):
        if self.dirichlet_alpha <= 0:
            raise EmptyInput("dirichlet_alpha must be positive")
        if self.clips < 1:
            raise InvalidCount("need at least one clip")
        lo, hi = self.subject_range
        if lo < 1 or hi < lo:
            raise InvalidCount("subjects_per_clip must be a positive int or (lo, hi)")

    @property
    def k_true(self) -> int:
        return self.true_affective.n_components

    @property
    def subject_range(self) -> Tuple[int, int]:
        s = self.subjects_per_clip
        if isinstance(s, tuple):
            return int(s[0]), int(s[1])
        return int(s), int(s)


def circular_true_model(
    k: int, radius: float = 0.75, variance: float = 0.01
) -> AffectiveGMM:
    """K isotropic components spaced evenly on a circle.

    A convenient, well-separated ground truth: for k=4 and radius
    sqrt(2)/2 the means sit at the four (+-0.5, +-0.5) corners.
    """
    if k < 1:
        raise InvalidCount("need at least one component")
    if variance <= 0 or radius <= 0:
        raise EmptyInput("radius and variance must be positive")
    angles = 2.0 * np.pi * np.arange(k) / k + np.pi / 4.0
    means = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    covs = np.tile(variance * np.eye(2), (k, 1, 1))
    from ..affective import Provenance

    return AffectiveGMM(
        topic_indices=tuple(range(k)),
        means=means,
        covs=covs,
        k_original=k,
        provenance=Provenance.UNIFORM,
    )


def synthesize_corpus(
    spec: SyntheticSpec,
) -> Tuple[EmotionCorpus, Dict[str, TopicPosterior], AffectiveGMM]:
    """Draw a corpus from the true model.

    Per clip: theta ~ Dirichlet(alpha * 1_K); each subject's annotation is
    a draw from the theta-weighted true components, clipped to the valid
    square so emitted corpora always satisfy the annotation range
    contract. Bit-identical given the same spec. Returns the corpus, the
    per-clip topic posteriors, and the true model for recovery scoring.
    """
    rng = np.random.default_rng(spec.seed)
    k = spec.k_true
    model = spec.true_affective
    chols = np.linalg.cholesky(model.covs)  # (K, 2, 2)
    lo, hi = spec.subject_range

    annotations: List[Annotation] = []
    thetas: Dict[str, TopicPosterior] = {}
    width = max(4, len(str(spec.clips - 1)))
    for i in range(spec.clips):
        cid = f"clip_{i:0{width}d}"
        theta = rng.dirichlet(np.full(k, spec.dirichlet_alpha))
        # lift the survivor-space simplex back to full K length
        full = np.zeros(model.k_original)
        full[list(model.topic_indices)] = theta
        thetas[cid] = TopicPosterior(clip_id=cid, theta=full)
        n_subj = int(rng.integers(lo, hi + 1)) if hi > lo else lo
        comps = rng.choice(k, size=n_subj, p=theta)
        noise = rng.standard_normal((n_subj, 2))
        for j in range(n_subj):
            c = comps[j]
            e = np.clip(model.means[c] + chols[c] @ noise[j], -1.0, 1.0)
            annotations.append(Annotation(clip_id=cid, subject_id=f"subj_{j:03d}", e=e))
    return EmotionCorpus(annotations), thetas, model


def generate_point_queries(n: int = 100, seed: int = 0) -> List[PointQuery]:
    """n i.i.d. uniform points on [-1, 1]^2, deterministic per seed."""
    if n < 1:
        raise InvalidCount("need at least one query")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(n, 2))
    return [PointQuery(p) for p in pts]


def pointify_to_gaussian_queries(
    points: Sequence[Query], c_min: float = 0.01, c_max: float = 0.25
) -> List[GaussianQuery]:
    """Wrap point queries in isotropic Gaussians whose variance shrinks
    linearly as the point moves away from the origin:

        sigma^2 = c_min + (c_max - c_min) * (1 - min(|e| / sqrt(2), 1))

    so a query at the origin is maximally uncertain and a corner query is
    maximally confident.
    """
    if not (0 < c_min < c_max):
        raise EmptyInput("need 0 < c_min < c_max")
    out: List[GaussianQuery] = []
    for q in points:
        if not isinstance(q, PointQuery):
            raise InvalidQueryKind("expected point queries")
        dist = min(float(np.linalg.norm(q.e)) / np.sqrt(2.0), 1.0)
        var = c_min + (c_max - c_min) * (1.0 - dist)
        out.append(GaussianQuery(Gaussian2(q.e, var * np.eye(2))))
    return out
