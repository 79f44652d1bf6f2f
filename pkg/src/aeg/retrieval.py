"""Emotion-based retrieval over an indexed clip library.

Two matching strategies share one index. Emotion Prediction matching
scores a query against each clip's predicted emotion distribution
(likelihood for point queries, symmetric KL for Gaussian queries).
Folding-In turns the query itself into a pseudo song: a simplex over the
latent topics obtained by a few EM updates against the affective
Gaussians, ranked by cosine similarity with the clips' topic posteriors.
An ensemble averages the two rankings.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .acoustic import AcousticGMM, TopicPosterior, topic_posterior
from .affective import AffectiveGMM
from .errors import (
    AegError,
    DuplicateClip,
    EmptyInput,
    ListMismatch,
    ModelMismatch,
    UnknownClip,
    ZeroVector,
)
from .features import SegmentMatrix
from .gaussians import Gaussian2, bivariate_log_densities, kl2, log_pdf, logsumexp
from .prediction import reduce_to_gaussian

# log of the smallest positive normal float64; densities below this are
# zero in linear space, which is what "underflow" means here
_LOG_TINY = float(np.log(np.finfo(np.float64).tiny))


class Method(enum.Enum):
    EMOTION_PREDICTION = "emotion_prediction"
    FOLDING_IN = "folding_in"
    ENSEMBLE = "ensemble"


class MatchMode(enum.Enum):
    SINGLE_GAUSSIAN = "single_gaussian"
    FULL_MIXTURE = "full_mixture"


@dataclass(frozen=True)
class PointQuery:
    e: np.ndarray

    def __post_init__(self):
        e = np.array(self.e, dtype=np.float64).reshape(-1)
        if e.shape != (2,) or not np.all(np.isfinite(e)):
            raise EmptyInput("point query must be a finite length-2 vector")
        e.flags.writeable = False
        object.__setattr__(self, "e", e)


@dataclass(frozen=True)
class GaussianQuery:
    g: Gaussian2


Query = PointQuery | GaussianQuery


@dataclass(frozen=True)
class IndexEntry:
    clip_id: str
    theta: TopicPosterior
    reduced: Gaussian2
    metadata: Optional[Mapping[str, str]] = None


@dataclass(frozen=True)
class LibraryIndex:
    """Immutable library snapshot bound to one affective model.

    Stores both per-clip representations (topic posterior and reduced
    Gaussian) so every ranking method runs against the same build.
    """

    entries: Tuple[IndexEntry, ...]
    affective: AffectiveGMM
    model_ref: str = ""
    skipped: Tuple[Tuple[str, str], ...] = field(default=(), compare=False)

    def __post_init__(self):
        ids = [e.clip_id for e in self.entries]
        if len(ids) != len(set(ids)):
            dupes = sorted({c for c in ids if ids.count(c) > 1})
            raise DuplicateClip(f"duplicate clip ids in index: {dupes}")
        object.__setattr__(self, "entries", tuple(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def clip_ids(self) -> List[str]:
        return [e.clip_id for e in self.entries]

    def entry(self, clip_id: str) -> IndexEntry:
        for e in self.entries:
            if e.clip_id == clip_id:
                return e
        raise UnknownClip(f"clip {clip_id!r} is not in the index")


@dataclass(frozen=True)
class RankedList:
    """(clip_id, score) pairs, best first; ties broken by ascending clip_id."""

    pairs: Tuple[Tuple[str, float], ...]
    method: Method
    descending: bool

    def clip_ids(self) -> List[str]:
        return [c for c, _ in self.pairs]

    def position(self, clip_id: str) -> int:
        """1-based rank of a clip."""
        for i, (c, _) in enumerate(self.pairs):
            if c == clip_id:
                return i + 1
        raise UnknownClip(f"clip {clip_id!r} is not in the ranked list")


@dataclass(frozen=True)
class PseudoSong:
    """Query folded into topic space: a simplex over surviving topics."""

    lambdas: np.ndarray
    topic_indices: Tuple[int, ...]
    far_from_model: bool = False

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=np.float64).reshape(-1)
        if lam.shape[0] != len(self.topic_indices):
            raise ModelMismatch("lambda length does not match topic indices")
        lam.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "topic_indices", tuple(int(i) for i in self.topic_indices))


def _sort_pairs(
    scored: Sequence[Tuple[str, float]], descending: bool
) -> Tuple[Tuple[str, float], ...]:
    if descending:
        return tuple(sorted(scored, key=lambda p: (-p[1], p[0])))
    return tuple(sorted(scored, key=lambda p: (p[1], p[0])))


def build_index(
    clips: Sequence[SegmentMatrix],
    acoustic: AcousticGMM,
    affective: AffectiveGMM,
    model_ref: str = "",
    metadata: Optional[Mapping[str, Mapping[str, str]]] = None,
) -> LibraryIndex:
    """Index a library: one topic posterior and one reduced Gaussian per
    clip. Clips that fail individually are skipped and reported in
    ``index.skipped`` as (clip_id, error code) pairs.
    """
    entries: List[IndexEntry] = []
    skipped: List[Tuple[str, str]] = []
    seen = set()
    for seg in clips:
        if seg.clip_id in seen:
            raise DuplicateClip(f"clip {seg.clip_id!r} appears twice")
        seen.add(seg.clip_id)
        try:
            theta = topic_posterior(seg, acoustic)
            reduced = reduce_to_gaussian(theta, affective)
        except AegError as err:
            skipped.append((seg.clip_id, err.code))
            continue
        meta = metadata.get(seg.clip_id) if metadata else None
        entries.append(IndexEntry(seg.clip_id, theta, reduced, meta))
    return LibraryIndex(
        entries=tuple(entries),
        affective=affective,
        model_ref=model_ref,
        skipped=tuple(skipped),
    )


def index_from_posteriors(
    posteriors: Sequence[TopicPosterior],
    affective: AffectiveGMM,
    model_ref: str = "",
) -> LibraryIndex:
    """Index straight from topic posteriors (no audio pass); used when the
    posteriors were produced elsewhere, including synthetic corpora.
    """
    entries: List[IndexEntry] = []
    skipped: List[Tuple[str, str]] = []
    seen = set()
    for tp in posteriors:
        if tp.clip_id in seen:
            raise DuplicateClip(f"clip {tp.clip_id!r} appears twice")
        seen.add(tp.clip_id)
        try:
            reduced = reduce_to_gaussian(tp, affective)
        except AegError as err:
            skipped.append((tp.clip_id, err.code))
            continue
        entries.append(IndexEntry(tp.clip_id, tp, reduced, None))
    return LibraryIndex(
        entries=tuple(entries),
        affective=affective,
        model_ref=model_ref,
        skipped=tuple(skipped),
    )


def rank_emotion_prediction(
    q: Query, idx: LibraryIndex, mode: MatchMode = MatchMode.SINGLE_GAUSSIAN
) -> RankedList:
    """Rank clips by how well their predicted emotion matches the query.

    Point queries score by log-likelihood (descending); Gaussian queries
    by symmetric KL divergence (ascending, smaller distance first). The
    mixture mode scores against the theta-weighted affective GMM instead
    of the reduced Gaussian.
    """
    model = idx.affective
    scored: List[Tuple[str, float]] = []
    if isinstance(q, PointQuery):
        point = q.e[None, :]
        if mode is MatchMode.FULL_MIXTURE:
            logd = bivariate_log_densities(point, model.means, model.covs)[0]
        for e in idx.entries:
            if mode is MatchMode.SINGLE_GAUSSIAN:
                score = log_pdf(q.e, e.reduced)
            else:
                w = model.restrict_theta(e.theta.theta)
                with np.errstate(divide="ignore"):
                    score = float(logsumexp(np.log(w) + logd, axis=0))
            scored.append((e.clip_id, float(score)))
        return RankedList(_sort_pairs(scored, descending=True), Method.EMOTION_PREDICTION, True)

    if mode is MatchMode.FULL_MIXTURE:
        kl_per_topic = np.array(
            [kl2(q.g, Gaussian2(model.means[i], model.covs[i])) for i in range(model.n_components)]
        )
    for e in idx.entries:
        if mode is MatchMode.SINGLE_GAUSSIAN:
            score = kl2(q.g, e.reduced)
        else:
            w = model.restrict_theta(e.theta.theta)
            score = float(w @ kl_per_topic)
        scored.append((e.clip_id, float(score)))
    return RankedList(_sort_pairs(scored, descending=False), Method.EMOTION_PREDICTION, False)


def fold_in(q: Query, model: AffectiveGMM, iters: int = 3) -> PseudoSong:
    """Fold a query into topic space.

    Starts from the uniform simplex over surviving topics and applies
    exactly ``iters`` EM updates of the query likelihood; each update
    replaces lambda with the posterior responsibilities. Per-topic
    affinity is the component density at a point query, or exp(-KL2) for
    a Gaussian query. If every affinity underflows to zero, lambda stays
    uniform and the result is flagged.
    """
    if iters < 1:
        raise EmptyInput("folding-in needs at least one update")
    ks = model.n_components
    if isinstance(q, PointQuery):
        logw = bivariate_log_densities(q.e[None, :], model.means, model.covs)[0]
    else:
        logw = -np.array(
            [kl2(q.g, Gaussian2(model.means[i], model.covs[i])) for i in range(ks)]
        )
    lam = np.full(ks, 1.0 / ks)
    if np.max(logw) < _LOG_TINY:
        return PseudoSong(lam, model.topic_indices, far_from_model=True)
    for _ in range(iters):
        with np.errstate(divide="ignore"):
            joint = np.log(lam) + logw
        lam = np.exp(joint - logsumexp(joint, axis=0))
    return PseudoSong(lam, model.topic_indices, far_from_model=False)


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0:
        raise ZeroVector("zero-norm pseudo song")
    if nv == 0.0:
        return 0.0
    return float(u @ v) / (nu * nv)


def rank_folding_in(pseudo: PseudoSong, idx: LibraryIndex) -> RankedList:
    """Cosine similarity between the pseudo song and each clip's topic
    posterior, best (largest) first.
    """
    model = idx.affective
    if pseudo.topic_indices != model.topic_indices:
        raise ModelMismatch("pseudo song topics do not match the index model")
    cols = list(model.topic_indices)
    scored: List[Tuple[str, float]] = []
    for e in idx.entries:
        theta = e.theta.theta
        # clip posteriors are over all K topics; compare on survivors
        v = theta[cols] if theta.shape[0] == model.k_original else theta
        scored.append((e.clip_id, _cosine(pseudo.lambdas, v)))
    return RankedList(_sort_pairs(scored, descending=True), Method.FOLDING_IN, True)


def reindex_for_model(idx: LibraryIndex, affective: AffectiveGMM,
                      model_ref: str = "") -> LibraryIndex:
    """Re-project an index onto another affective model (an adapted one,
    typically): topic posteriors are reused, reduced Gaussians recomputed.
    """
    entries: List[IndexEntry] = []
    skipped = list(idx.skipped)
    for e in idx.entries:
        try:
            reduced = reduce_to_gaussian(e.theta, affective)
        except AegError as err:
            skipped.append((e.clip_id, err.code))
            continue
        entries.append(IndexEntry(e.clip_id, e.theta, reduced, e.metadata))
    return LibraryIndex(
        entries=tuple(entries),
        affective=affective,
        model_ref=model_ref,
        skipped=tuple(skipped),
    )


def rank_ensemble(a: RankedList, b: RankedList) -> RankedList:
    """Average the 1-based ranks a clip gets from two methods; smaller
    mean rank is better.
    """
    ids_a = set(a.clip_ids())
    ids_b = set(b.clip_ids())
    if ids_a != ids_b:
        raise ListMismatch("ranked lists cover different clips")
    pos_a = {c: i + 1 for i, (c, _) in enumerate(a.pairs)}
    pos_b = {c: i + 1 for i, (c, _) in enumerate(b.pairs)}
    scored = [(c, 0.5 * (pos_a[c] + pos_b[c])) for c in pos_a]
    return RankedList(_sort_pairs(scored, descending=False), Method.ENSEMBLE, False)
