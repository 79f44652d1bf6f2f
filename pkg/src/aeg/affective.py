"""Learning the affective Gaussians tied to the acoustic topics.

Each latent topic k owns a bivariate Gaussian over the valence-arousal
plane. Training maximizes a Jensen lower bound on the prior-weighted
annotation log-likelihood with EM: the E-step computes topic
responsibilities proportional to theta_{i,k} times the component density
at each annotation, the M-step re-estimates prior-weighted means and
scatters. Components whose updated covariance loses positive definiteness
are removed and training continues on the survivors; early stopping (few
iterations, coarse gain threshold) is deliberate and doubles as
regularization.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from .acoustic import TopicPosterior
from .annotations import EmotionCorpus, CorpusPriors
from .errors import (
    EmptyInput,
    MissingPosterior,
    ModelCollapsed,
    ModelMismatch,
    NoSupportingTopics,
)
from .gaussians import Gaussian2, bivariate_log_densities, is_positive_definite, logsumexp


class Provenance(enum.Enum):
    UNIFORM = "uniform"
    ANNOPRIOR = "annoprior"
    HYBRID = "hybrid"
    ADAPTED = "adapted"


class Mode(enum.Enum):
    UNIFORM = "uniform"
    ANNOPRIOR = "annoprior"


@dataclass(frozen=True)
class LearnConfig:
    max_iters: int = 9
    min_rel_gain: float = 0.01
    mode: Mode = Mode.UNIFORM

    def __post_init__(self):
        if self.max_iters < 1:
            raise EmptyInput("max_iters must be >= 1")
        if self.min_rel_gain < 0:
            raise EmptyInput("min_rel_gain must be >= 0")


@dataclass(frozen=True)
class AffectiveGMM:
    """Per-topic bivariate Gaussians, index-aligned with the acoustic model.

    ``topic_indices`` lists the surviving topics in ascending order;
    ``means``/``covs`` are aligned with it. Removed topics stay removed in
    every derived model so indices keep their meaning.
    """

    topic_indices: Tuple[int, ...]
    means: np.ndarray
    covs: np.ndarray
    k_original: int
    provenance: Provenance
    removed_topics: frozenset = frozenset()
    cov_fallback_topics: frozenset = field(default=frozenset(), compare=False)

    def __post_init__(self):
        means = np.array(self.means, dtype=np.float64).reshape(-1, 2)
        covs = np.array(self.covs, dtype=np.float64).reshape(-1, 2, 2)
        idx = tuple(int(i) for i in self.topic_indices)
        if len(idx) != len(set(idx)):
            raise ModelMismatch("duplicate topic indices")
        if any(i < 0 or i >= self.k_original for i in idx):
            raise ModelMismatch("topic index outside [0, K)")
        if means.shape[0] != len(idx) or covs.shape[0] != len(idx):
            raise ModelMismatch("component count mismatch")
        if len(idx) == 0:
            raise ModelCollapsed("no surviving components")
        if set(idx) | set(self.removed_topics) != set(range(self.k_original)):
            raise ModelMismatch("surviving and removed topics must partition [0, K)")
        for i in range(len(idx)):
            if not is_positive_definite(covs[i]):
                raise ModelMismatch(f"component for topic {idx[i]} is not positive definite")
        means.flags.writeable = False
        covs.flags.writeable = False
        object.__setattr__(self, "topic_indices", idx)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", covs)
        object.__setattr__(self, "removed_topics", frozenset(int(i) for i in self.removed_topics))
        object.__setattr__(
            self, "cov_fallback_topics", frozenset(int(i) for i in self.cov_fallback_topics)
        )

    @property
    def n_components(self) -> int:
        return len(self.topic_indices)

    def components(self) -> List[Tuple[int, Gaussian2]]:
        return [
            (self.topic_indices[i], Gaussian2(self.means[i], self.covs[i]))
            for i in range(self.n_components)
        ]

    def component_for_topic(self, topic: int) -> Gaussian2:
        pos = self.topic_indices.index(topic)
        return Gaussian2(self.means[pos], self.covs[pos])

    def restrict_theta(self, theta: np.ndarray) -> np.ndarray:
        """Project a length-K_original simplex onto the surviving topics and
        renormalize. Raises NoSupportingTopics when no mass survives.

        A survivor-length vector passes through (renormalized).
        """
        theta = np.asarray(theta, dtype=np.float64).reshape(-1)
        if theta.shape[0] == self.k_original:
            theta = theta[list(self.topic_indices)]
        elif theta.shape[0] != self.n_components:
            raise ModelMismatch(
                f"theta length {theta.shape[0]} matches neither K={self.k_original} "
                f"nor surviving {self.n_components}"
            )
        total = float(theta.sum())
        if total <= 0:
            raise NoSupportingTopics("all posterior mass falls on removed topics")
        return theta / total


def _flatten_corpus(
    thetas: Mapping[str, TopicPosterior],
    corpus: EmotionCorpus,
    priors: CorpusPriors | None,
    uniform: bool,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Stack annotations into (points, gamma, theta_rows, K)."""
    k = None
    points, gammas, rows = [], [], []
    for cid in corpus.clip_ids:
        tp = thetas.get(cid)
        if tp is None:
            raise MissingPosterior(f"clip {cid!r} has no topic posterior")
        if k is None:
            k = tp.k
        elif tp.k != k:
            raise ModelMismatch("inconsistent topic posterior lengths")
        for j, ann in enumerate(corpus.clip_annotations(cid)):
            points.append(ann.e)
            gammas.append(1.0 if uniform else priors.weight(cid, j))
            rows.append(tp.theta)
    return (
        np.array(points, dtype=np.float64),
        np.array(gammas, dtype=np.float64),
        np.array(rows, dtype=np.float64),
        int(k),
    )


def _regularized_global_cov(points: np.ndarray) -> np.ndarray:
    diff = points - points.mean(axis=0)
    cov = diff.T @ diff / points.shape[0]
    cov = 0.5 * (cov + cov.T)
    if np.min(np.linalg.eigvalsh(cov)) < 1e-6:
        cov = cov + 1e-3 * np.eye(2)
    return cov


def initialize_affective(
    thetas: Mapping[str, TopicPosterior],
    corpus: EmotionCorpus,
    provenance: Provenance = Provenance.UNIFORM,
) -> AffectiveGMM:
    """Deterministic starting point: theta-weighted annotation mean per
    topic, global annotation covariance everywhere. Topics with zero theta
    mass start at the global mean.
    """
    points, _, theta_rows, k = _flatten_corpus(thetas, corpus, None, uniform=True)
    mass = theta_rows.sum(axis=0)  # (K,)
    global_mean = points.mean(axis=0)
    global_cov = _regularized_global_cov(points)
    means = np.tile(global_mean, (k, 1))
    nz = mass > 0
    means[nz] = (theta_rows.T @ points)[nz] / mass[nz, None]
    covs = np.tile(global_cov, (k, 1, 1))
    return AffectiveGMM(
        topic_indices=tuple(range(k)),
        means=means,
        covs=covs,
        k_original=k,
        provenance=provenance,
    )


def _restrict_rows(theta_rows: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Renormalize theta rows over surviving columns; rows with no surviving
    mass fall back to uniform so responsibilities stay on a simplex.
    """
    rows = theta_rows[:, keep]
    totals = rows.sum(axis=1)
    dead = totals <= 0
    if np.any(dead):
        rows[dead] = 1.0 / rows.shape[1]
        totals = rows.sum(axis=1)
    return rows / totals[:, None]


def learn_affective_gmm(
    thetas: Mapping[str, TopicPosterior],
    corpus: EmotionCorpus,
    priors: CorpusPriors | None = None,
    config: LearnConfig = LearnConfig(),
) -> Tuple[AffectiveGMM, List[float]]:
    """EM on the prior-weighted Jensen bound.

    Returns the learned model and the bound trace (entry 0 is the bound of
    the deterministic initialization; one entry per applied M-step after
    that). The trace is nondecreasing except across component-removal
    events, which shed probability mass.
    """
    if config.mode is Mode.ANNOPRIOR and priors is None:
        raise EmptyInput("annotation-prior mode needs computed priors")
    uniform = config.mode is Mode.UNIFORM
    points, gamma, theta_rows_full, k = _flatten_corpus(
        thetas, corpus, priors, uniform=uniform
    )

    init = initialize_affective(
        thetas, corpus,
        provenance=Provenance.UNIFORM if uniform else Provenance.ANNOPRIOR,
    )
    means = np.array(init.means)
    covs = np.array(init.covs)
    alive = np.ones(k, dtype=bool)
    theta_rows = _restrict_rows(np.array(theta_rows_full), alive)

    def bound() -> float:
        logd = bivariate_log_densities(points, means, covs)
        with np.errstate(divide="ignore"):
            mix = logsumexp(np.log(theta_rows) + logd, axis=1)
        return float(np.sum(gamma * mix))

    trace = [bound()]
    for _ in range(config.max_iters):
        # E-step: responsibilities over surviving topics
        logd = bivariate_log_densities(points, means, covs)
        with np.errstate(divide="ignore"):
            joint = np.log(theta_rows) + logd
        norm = logsumexp(joint, axis=1)
        resp = np.exp(joint - norm[:, None])

        # M-step: prior-weighted mean and scatter updates
        w = gamma[:, None] * resp
        denom = w.sum(axis=0)
        n_alive = means.shape[0]
        new_means = np.empty_like(means)
        new_covs = np.empty_like(covs)
        keep = np.ones(n_alive, dtype=bool)
        for c in range(n_alive):
            if denom[c] <= 0 or not np.isfinite(denom[c]):
                keep[c] = False
                continue
            mu = (w[:, c] @ points) / denom[c]
            diff = points - mu
            cov = (w[:, c][:, None] * diff).T @ diff / denom[c]
            cov = 0.5 * (cov + cov.T)
            if not np.all(np.isfinite(cov)) or not is_positive_definite(cov):
                keep[c] = False
                continue
            new_means[c] = mu
            new_covs[c] = cov

        if not np.any(keep):
            raise ModelCollapsed("every component was removed during training")
        if not np.all(keep):
            alive_idx = np.flatnonzero(alive)
            alive[alive_idx[~keep]] = False
            means = new_means[keep]
            covs = new_covs[keep]
            theta_rows = _restrict_rows(np.array(theta_rows_full), alive)
        else:
            means = new_means
            covs = new_covs

        trace.append(bound())
        prev, cur = trace[-2], trace[-1]
        if (cur - prev) / max(abs(prev), 1e-300) < config.min_rel_gain:
            break

    surviving = tuple(int(i) for i in np.flatnonzero(alive))
    model = AffectiveGMM(
        topic_indices=surviving,
        means=means,
        covs=covs,
        k_original=k,
        provenance=Provenance.UNIFORM if uniform else Provenance.ANNOPRIOR,
        removed_topics=frozenset(int(i) for i in np.flatnonzero(~alive)),
    )
    return model, trace


def combine_hybrid(uniform: AffectiveGMM, annoprior: AffectiveGMM) -> AffectiveGMM:
    """Merge two runs: means from the first model, covariances from the
    second, matched by topic index; a topic removed in either parent is
    removed in the result.
    """
    if uniform.k_original != annoprior.k_original:
        raise ModelMismatch(
            f"K mismatch: {uniform.k_original} vs {annoprior.k_original}"
        )
    removed = uniform.removed_topics | annoprior.removed_topics
    surviving = [t for t in range(uniform.k_original) if t not in removed]
    if not surviving:
        raise ModelCollapsed("no topic survives in both parents")
    means = np.array([uniform.means[uniform.topic_indices.index(t)] for t in surviving])
    covs = np.array([annoprior.covs[annoprior.topic_indices.index(t)] for t in surviving])
    return AffectiveGMM(
        topic_indices=tuple(surviving),
        means=means,
        covs=covs,
        k_original=uniform.k_original,
        provenance=Provenance.HYBRID,
        removed_topics=frozenset(removed),
    )
