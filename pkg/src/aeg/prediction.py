"""Clip-level emotion prediction.

A clip's topic posterior weights the affective Gaussians into a mixture
over the VA plane; a closed-form moment match gives the single Gaussian
minimizing the weighted KL divergence from the mixture components.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acoustic import TopicPosterior
from .affective import AffectiveGMM
from .gaussians import Gaussian2, Mixture


@dataclass(frozen=True)
class EmotionPrediction:
    theta: TopicPosterior
    mixture: Mixture
    reduced: Gaussian2


def predict_mixture(theta: TopicPosterior, model: AffectiveGMM) -> Mixture:
    """Weight the affective Gaussians by the clip's topic posterior.

    The posterior is renormalized over surviving topics when the model
    dropped components during training.
    """
    weights = model.restrict_theta(theta.theta)
    components = [Gaussian2(model.means[i], model.covs[i]) for i in range(model.n_components)]
    return Mixture(weights=weights, components=tuple(components))


def reduce_to_gaussian(theta: TopicPosterior, model: AffectiveGMM) -> Gaussian2:
    """Single representative Gaussian for a clip.

    mu_hat = sum_k theta_k mu_k; Sigma_hat = sum_k theta_k (Sigma_k +
    (mu_k - mu_hat)(mu_k - mu_hat)^T). These are the unique minimizers of
    the theta-weighted one-way KL from each component, and coincide with
    the mixture's exact first two moments.
    """
    w = model.restrict_theta(theta.theta)
    mu_hat = w @ model.means
    diff = model.means - mu_hat
    sigma_hat = np.einsum("k,kij->ij", w, model.covs) + diff.T @ (w[:, None] * diff)
    return Gaussian2(mu_hat, sigma_hat)


def predict(theta: TopicPosterior, model: AffectiveGMM) -> EmotionPrediction:
    return EmotionPrediction(
        theta=theta,
        mixture=predict_mixture(theta, model),
        reduced=reduce_to_gaussian(theta, model),
    )
