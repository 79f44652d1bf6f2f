"""Acoustic mixture model over segment vectors and topic posteriors.

The mixture is trained with EM (diagonal covariances by default, full
behind a config flag) from a k-means++ seeding. Topic posteriors weight
every component equally: the EM-learned mixture weights are stored for
inspection but deliberately ignored when representing a clip, because they
describe the training pool rather than any one clip.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .errors import DimensionMismatch, InsufficientData
from .features import SegmentMatrix
from .gaussians import GaussianD, logsumexp

VARIANCE_FLOOR_FACTOR = 1e-4


@dataclass(frozen=True)
class AcousticTrainConfig:
    seed: int = 0
    max_iters: int = 100
    min_rel_gain: float = 1e-5
    full_covariance: bool = False
    variance_floor_factor: float = VARIANCE_FLOOR_FACTOR


@dataclass(frozen=True)
class TopicPosterior:
    """Length-K simplex summarizing one clip's segments."""

    clip_id: str
    theta: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64).reshape(-1)
        if theta.shape[0] < 1:
            raise DimensionMismatch("theta must have at least one entry")
        if np.any(theta < -1e-12) or abs(float(theta.sum()) - 1.0) > 1e-9:
            raise DimensionMismatch("theta must be a simplex vector")
        theta = np.clip(theta, 0.0, None)
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)

    @property
    def k(self) -> int:
        return int(self.theta.shape[0])


@dataclass(frozen=True)
class AcousticGMM:
    """K-component Gaussian mixture over segment feature space.

    ``covariances`` is (K, D) when diagonal, (K, D, D) when full.
    """

    means: np.ndarray
    covariances: np.ndarray
    trained_weights: np.ndarray
    log_likelihood_trace: tuple = field(default=(), compare=False)

    def __post_init__(self):
        means = np.array(self.means, dtype=np.float64)
        covs = np.array(self.covariances, dtype=np.float64)
        weights = np.array(self.trained_weights, dtype=np.float64).reshape(-1)
        if means.ndim != 2:
            raise DimensionMismatch("means must be (K, D)")
        k = means.shape[0]
        if weights.shape[0] != k or covs.shape[0] != k:
            raise DimensionMismatch("component count mismatch")
        if abs(float(weights.sum()) - 1.0) > 1e-9 or np.any(weights < 0):
            raise DimensionMismatch("trained weights must be a simplex vector")
        for a in (means, covs, weights):
            a.flags.writeable = False
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariances", covs)
        object.__setattr__(self, "trained_weights", weights)

    @property
    def k(self) -> int:
        return int(self.means.shape[0])

    @property
    def feature_dim(self) -> int:
        return int(self.means.shape[1])

    @property
    def is_diagonal(self) -> bool:
        return self.covariances.ndim == 2

    def components(self) -> List[GaussianD]:
        return [GaussianD(self.means[i], self.covariances[i]) for i in range(self.k)]

    def log_densities(self, x: np.ndarray) -> np.ndarray:
        """(T, K) matrix of per-component log densities for rows of x."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.feature_dim:
            raise DimensionMismatch(
                f"rows must have dim {self.feature_dim}, got shape {x.shape}"
            )
        d = self.feature_dim
        if self.is_diagonal:
            var = self.covariances  # (K, D)
            diff = x[:, None, :] - self.means[None, :, :]  # (T, K, D)
            maha = np.sum(diff * diff / var[None, :, :], axis=2)
            logdet = np.sum(np.log(var), axis=1)  # (K,)
        else:
            maha = np.empty((x.shape[0], self.k))
            logdet = np.empty(self.k)
            for i in range(self.k):
                chol = np.linalg.cholesky(self.covariances[i])
                sol = np.linalg.solve(chol, (x - self.means[i]).T)
                maha[:, i] = np.sum(sol * sol, axis=0)
                logdet[i] = 2.0 * np.sum(np.log(np.diag(chol)))
        return -0.5 * (d * np.log(2.0 * np.pi) + logdet[None, :] + maha)


def _kmeans_pp_centers(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[i:] = x[rng.integers(n, size=k - i)]
            break
        probs = d2 / total
        centers[i] = x[rng.choice(n, p=probs)]
        d2 = np.minimum(d2, np.sum((x - centers[i]) ** 2, axis=1))
    return centers


def train_acoustic_gmm(
    segments: np.ndarray, k: int, config: AcousticTrainConfig = AcousticTrainConfig()
) -> AcousticGMM:
    """EM-fit a K-component mixture to pooled segment rows.

    The per-sample average log-likelihood is recorded after every M-step;
    training stops at max_iters or when the relative gain drops below
    ``min_rel_gain``. Variances are floored at
    ``variance_floor_factor * global per-dimension variance``.
    """
    x = np.asarray(segments, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch("segments must be a 2-D matrix")
    n, d = x.shape
    if k < 1:
        raise InsufficientData("K must be >= 1")
    if n < k:
        raise InsufficientData(f"{n} rows cannot support K={k}")

    rng = np.random.default_rng(config.seed)
    global_var = np.maximum(x.var(axis=0), 1e-12)
    floor = config.variance_floor_factor * global_var

    means = _kmeans_pp_centers(x, k, rng)
    variances = np.tile(np.maximum(global_var, floor), (k, 1))
    weights = np.full(k, 1.0 / k)
    full_covs = np.array([np.diag(v) for v in variances]) if config.full_covariance else None

    trace = []
    prev_ll = None
    for _ in range(config.max_iters):
        model = AcousticGMM(
            means=means,
            covariances=full_covs if config.full_covariance else variances,
            trained_weights=weights,
        )
        logd = model.log_densities(x) + np.log(weights)[None, :]
        norm = logsumexp(logd, axis=1)  # (T,)
        resp = np.exp(logd - norm[:, None])

        nk = resp.sum(axis=0)
        nk = np.maximum(nk, 1e-300)
        weights = nk / n
        weights = weights / weights.sum()
        means = (resp.T @ x) / nk[:, None]
        if config.full_covariance:
            full_covs = np.empty((k, d, d))
            for i in range(k):
                diff = x - means[i]
                cov = (resp[:, i][:, None] * diff).T @ diff / nk[i]
                cov = 0.5 * (cov + cov.T)
                cov[np.diag_indices(d)] = np.maximum(np.diag(cov), floor)
                full_covs[i] = cov
        else:
            ex2 = (resp.T @ (x * x)) / nk[:, None]
            variances = np.maximum(ex2 - means * means, floor)

        ll = float(np.mean(norm))
        trace.append(ll)
        if prev_ll is not None and ll - prev_ll < config.min_rel_gain * abs(prev_ll):
            break
        prev_ll = ll

    return AcousticGMM(
        means=means,
        covariances=full_covs if config.full_covariance else variances,
        trained_weights=weights,
        log_likelihood_trace=tuple(trace),
    )


def topic_posterior(seg: SegmentMatrix, model: AcousticGMM) -> TopicPosterior:
    """Average per-segment component responsibilities under equal weights."""
    if seg.dim != model.feature_dim:
        raise DimensionMismatch(
            f"clip {seg.clip_id!r} has dim {seg.dim}, model expects {model.feature_dim}"
        )
    logd = model.log_densities(seg.segments)  # equal prior weights: no +log(pi)
    norm = logsumexp(logd, axis=1)
    resp = np.exp(logd - norm[:, None])
    theta = resp.mean(axis=0)
    theta = theta / theta.sum()
    return TopicPosterior(clip_id=seg.clip_id, theta=theta)
