"""MAP adaptation of the affective Gaussians toward one listener.

A handful of personal annotations re-estimates the component means (and
optionally covariances) as an interpolation between the expected
sufficient statistics of the personal data and the background model. The
interpolation weight per component is data-dependent: components the user
never touches keep their background parameters exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .acoustic import TopicPosterior
from .affective import AffectiveGMM, Provenance
from .errors import EmptyInput
from .gaussians import bivariate_log_densities, is_positive_definite, logsumexp


@dataclass(frozen=True)
class PersonalDatum:
    """One user-labeled clip: topic posterior plus a single VA point."""

    theta: TopicPosterior
    e: np.ndarray

    def __post_init__(self):
        e = np.array(self.e, dtype=np.float64).reshape(-1)
        if e.shape != (2,) or not np.all(np.isfinite(e)):
            raise EmptyInput("personal annotation must be a finite length-2 vector")
        e.flags.writeable = False
        object.__setattr__(self, "e", e)


@dataclass(frozen=True)
class AdaptConfig:
    beta_mean: float = 0.01
    beta_cov: float = 0.01
    adapt_cov: bool = False

    def __post_init__(self):
        if self.beta_mean < 0 or self.beta_cov < 0:
            raise EmptyInput("interpolation hyperparameters must be >= 0")


def _responsibilities(
    background: AffectiveGMM, data: Sequence[PersonalDatum]
) -> Tuple[np.ndarray, np.ndarray]:
    """(points (M,2), resp (M,Ks)) over the surviving components."""
    points = np.array([d.e for d in data], dtype=np.float64)
    rows = np.array([background.restrict_theta(d.theta.theta) for d in data])
    logd = bivariate_log_densities(points, background.means, background.covs)
    with np.errstate(divide="ignore"):
        joint = np.log(rows) + logd
    resp = np.exp(joint - logsumexp(joint, axis=1)[:, None])
    return points, resp


def map_adapt(
    background: AffectiveGMM,
    data: Sequence[PersonalDatum],
    config: AdaptConfig = AdaptConfig(),
) -> AffectiveGMM:
    """Interpolate component parameters toward the personal data.

    Mixture weights are carried by the clip topic posteriors and are never
    updated here. With ``adapt_cov`` off (the default) covariances pass
    through bit-identical; with it on, an update that loses positive
    definiteness falls back to the background covariance and the topic is
    flagged in ``cov_fallback_topics``.
    """
    if len(data) == 0:
        raise EmptyInput("no personal annotations to adapt with")
    points, resp = _responsibilities(background, data)

    gamma = resp.sum(axis=0)  # (Ks,)
    new_means = np.array(background.means)
    new_covs = np.array(background.covs)
    fallbacks = set()
    touched = gamma > 0
    for c in np.flatnonzero(touched):
        g = gamma[c]
        e_mu = (resp[:, c] @ points) / g
        alpha_m = g / (g + config.beta_mean)
        mu_prime = alpha_m * e_mu + (1.0 - alpha_m) * background.means[c]
        new_means[c] = mu_prime
        if not config.adapt_cov:
            continue
        diff = points - e_mu
        e_cov = (resp[:, c][:, None] * diff).T @ diff / g
        alpha_v = g / (g + config.beta_cov)
        mu_bg = background.means[c]
        cov = (
            alpha_v * e_cov
            + (1.0 - alpha_v) * (background.covs[c] + np.outer(mu_bg, mu_bg))
            - np.outer(mu_prime, mu_prime)
        )
        cov = 0.5 * (cov + cov.T)
        if np.all(np.isfinite(cov)) and is_positive_definite(cov):
            new_covs[c] = cov
        else:
            fallbacks.add(background.topic_indices[c])

    return AffectiveGMM(
        topic_indices=background.topic_indices,
        means=new_means,
        covs=new_covs,
        k_original=background.k_original,
        provenance=Provenance.ADAPTED,
        removed_topics=background.removed_topics,
        cov_fallback_topics=frozenset(fallbacks),
    )


def adapt_incrementally(
    background: AffectiveGMM,
    batches: Sequence[Sequence[PersonalDatum]],
    config: AdaptConfig = AdaptConfig(),
) -> List[AffectiveGMM]:
    """Online protocol: each batch adapts the previous adapted model.
    Returns the model trajectory, one entry per batch.
    """
    if len(batches) == 0:
        raise EmptyInput("no batches to adapt with")
    trajectory: List[AffectiveGMM] = []
    current = background
    for batch in batches:
        current = map_adapt(current, batch, config)
        trajectory.append(current)
    return trajectory
