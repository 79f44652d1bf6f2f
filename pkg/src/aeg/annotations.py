"""Per-clip annotation Gaussians and corpus-level annotation priors.

Each clip's annotations are summarized by a bivariate Gaussian (sample
mean, divisor-U scatter) regularized to stay positive definite. The
corpus-level prior assigns each annotation a weight proportional to its
density under its own clip's Gaussian, normalized over the whole corpus so
the weights sum to one; uniform priors keep every weight at exactly 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np

from .errors import EmptyInput, ListMismatch
from .gaussians import Gaussian2, log_pdf, logsumexp

RIDGE = 1e-3
MIN_EIGENVALUE = 1e-6


@dataclass(frozen=True)
class Annotation:
    """One subject's valence-arousal rating of one clip."""

    clip_id: str
    subject_id: str
    e: np.ndarray

    def __post_init__(self):
        if not self.clip_id or not self.subject_id:
            raise EmptyInput("clip_id and subject_id must be nonempty")
        e = np.array(self.e, dtype=np.float64).reshape(-1)
        if e.shape != (2,) or not np.all(np.isfinite(e)):
            raise EmptyInput("annotation must be a finite length-2 vector")
        e.flags.writeable = False
        object.__setattr__(self, "e", e)


@dataclass(frozen=True)
class ClipAnnotationModel:
    """Gaussian summary of one clip's annotations."""

    clip_id: str
    a: np.ndarray
    b: np.ndarray
    u: int

    def __post_init__(self):
        a = np.array(self.a, dtype=np.float64).reshape(-1)
        b = np.array(self.b, dtype=np.float64)
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def gaussian(self) -> Gaussian2:
        return Gaussian2(mean=self.a, cov=self.b)


class EmotionCorpus:
    """Clips with per-subject annotations; the training substrate."""

    def __init__(self, annotations: Sequence[Annotation]):
        if not annotations:
            raise EmptyInput("corpus has no annotations")
        by_clip: Dict[str, List[Annotation]] = {}
        for ann in annotations:
            by_clip.setdefault(ann.clip_id, []).append(ann)
        self._annotations = tuple(annotations)
        self._by_clip = {cid: tuple(v) for cid, v in by_clip.items()}
        self._clip_ids = tuple(self._by_clip)

    @property
    def clip_ids(self) -> Tuple[str, ...]:
        return self._clip_ids

    @property
    def annotations(self) -> Tuple[Annotation, ...]:
        return self._annotations

    def clip_annotations(self, clip_id: str) -> Tuple[Annotation, ...]:
        return self._by_clip[clip_id]

    def clip_points(self, clip_id: str) -> np.ndarray:
        return np.array([ann.e for ann in self._by_clip[clip_id]])

    def __len__(self) -> int:
        return len(self._clip_ids)


def fit_clip_model(annotations: Sequence[Annotation]) -> ClipAnnotationModel:
    """Sample mean and divisor-U scatter of one clip's annotations.

    The scatter gets a RIDGE * I bump whenever its smallest eigenvalue is
    below MIN_EIGENVALUE, so single-point and collinear clips still yield
    a positive definite Gaussian.
    """
    anns = list(annotations)
    if not anns:
        raise EmptyInput("clip has no annotations")
    clip_id = anns[0].clip_id
    if any(a.clip_id != clip_id for a in anns):
        raise ListMismatch("annotations span multiple clips")
    pts = np.array([a.e for a in anns])
    u = pts.shape[0]
    a = pts.mean(axis=0)
    diff = pts - a
    b = diff.T @ diff / u
    b = 0.5 * (b + b.T)
    if np.min(np.linalg.eigvalsh(b)) < MIN_EIGENVALUE:
        b = b + RIDGE * np.eye(2)
    return ClipAnnotationModel(clip_id=clip_id, a=a, b=b, u=u)


def fit_all_clip_models(corpus: EmotionCorpus) -> Dict[str, ClipAnnotationModel]:
    return {cid: fit_clip_model(corpus.clip_annotations(cid)) for cid in corpus.clip_ids}


@dataclass(frozen=True)
class CorpusPriors:
    """Per-annotation weights keyed by (clip_id, annotation index).

    Computed priors sum to 1 over the corpus; uniform priors store a
    weight of 1 for every annotation and are NOT normalized, so consumers
    must not assume unit total mass in uniform mode.
    """

    gamma: Mapping[Tuple[str, int], float]
    uniform: bool = field(default=False)

    def __post_init__(self):
        if not self.gamma:
            raise EmptyInput("priors are empty")
        total = float(sum(self.gamma.values()))
        if not self.uniform and abs(total - 1.0) > 1e-9:
            raise ListMismatch(f"computed priors must sum to 1, got {total}")
        object.__setattr__(self, "gamma", dict(self.gamma))

    def weight(self, clip_id: str, index: int) -> float:
        return self.gamma[(clip_id, index)]

    @staticmethod
    def uniform_for(corpus: EmotionCorpus) -> "CorpusPriors":
        gamma = {
            (cid, j): 1.0
            for cid in corpus.clip_ids
            for j in range(len(corpus.clip_annotations(cid)))
        }
        return CorpusPriors(gamma=gamma, uniform=True)


def compute_corpus_priors(
    corpus: EmotionCorpus,
    clip_models: Mapping[str, ClipAnnotationModel] | None = None,
) -> CorpusPriors:
    """Weight each annotation by its density under its own clip's Gaussian,
    normalized over all annotations in the corpus (log-space throughout).
    """
    if clip_models is None:
        clip_models = fit_all_clip_models(corpus)
    keys = []
    logs = []
    for cid in corpus.clip_ids:
        g = clip_models[cid].gaussian()
        for j, ann in enumerate(corpus.clip_annotations(cid)):
            keys.append((cid, j))
            logs.append(log_pdf(ann.e, g))
    logs = np.array(logs)
    total = logsumexp(logs)
    gamma = {key: float(np.exp(lg - total)) for key, lg in zip(keys, logs)}
    return CorpusPriors(gamma=gamma, uniform=False)
