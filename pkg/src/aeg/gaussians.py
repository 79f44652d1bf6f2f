"""Bivariate and general-dimension Gaussian primitives.

Densities are evaluated in log space and covariance inversions go through
Cholesky factors, never an explicit inverse. Positive definiteness is
decided by the Cholesky pivots against ``PD_EPSILON``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DegenerateCovariance, DimensionMismatch, InvalidMatrix

PD_EPSILON = 1e-10
SYMMETRY_TOL = 1e-12

LOG_2PI = float(np.log(2.0 * np.pi))


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


def _cholesky_pivots(cov: np.ndarray):
    """Lower Cholesky factor and its pivots (squared diagonal), or None.

    The pivot at step i is the residual diagonal entry before the square
    root, i.e. ``L[i, i] ** 2``; a factorization counts as successful only
    when every pivot exceeds PD_EPSILON.
    """
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        return None
    d = np.diag(chol)
    if not np.all(np.isfinite(d)) or np.any(d * d <= PD_EPSILON):
        return None
    return chol


def is_positive_definite(cov: np.ndarray) -> bool:
    """True iff the symmetric matrix has a Cholesky factorization with all
    pivots above PD_EPSILON.

    Raises InvalidMatrix for an asymmetric input.
    """
    cov = np.asarray(cov, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise InvalidMatrix(f"expected a square matrix, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise InvalidMatrix("matrix has non-finite entries")
    if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(cov)))):
        raise InvalidMatrix("matrix is not symmetric")
    return _cholesky_pivots(cov) is not None


@dataclass(frozen=True)
class Gaussian2:
    """Bivariate Gaussian over the valence-arousal plane."""

    mean: np.ndarray
    cov: np.ndarray
    degenerate: bool = field(default=False, compare=False)

    def __post_init__(self):
        mean = _freeze(np.asarray(self.mean, dtype=np.float64).reshape(-1))
        cov = np.asarray(self.cov, dtype=np.float64)
        if mean.shape != (2,):
            raise DimensionMismatch(f"mean must be length 2, got {mean.shape}")
        if cov.shape != (2, 2):
            raise DimensionMismatch(f"cov must be 2x2, got {cov.shape}")
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(cov)))):
            raise InvalidMatrix("covariance is not symmetric")
        cov = _freeze(0.5 * (cov + cov.T))
        if not self.degenerate and _cholesky_pivots(cov) is None:
            raise DegenerateCovariance("covariance is not positive definite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return 2


@dataclass(frozen=True)
class GaussianD:
    """D-dimensional Gaussian over feature space.

    ``cov`` may be passed as a length-D vector, in which case the
    covariance is stored (and operated on) as a diagonal.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = _freeze(np.asarray(self.mean, dtype=np.float64).reshape(-1))
        cov = np.asarray(self.cov, dtype=np.float64)
        d = mean.shape[0]
        if cov.ndim == 1:
            if cov.shape != (d,):
                raise DimensionMismatch("diagonal cov length must match mean")
            if np.any(cov <= PD_EPSILON):
                raise DegenerateCovariance("diagonal covariance has a non-positive entry")
            cov = _freeze(cov)
        elif cov.ndim == 2:
            if cov.shape != (d, d):
                raise DimensionMismatch("cov shape must match mean dimension")
            if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(cov)))):
                raise InvalidMatrix("covariance is not symmetric")
            cov = _freeze(0.5 * (cov + cov.T))
            if _cholesky_pivots(cov) is None:
                raise DegenerateCovariance("covariance is not positive definite")
        else:
            raise DimensionMismatch("cov must be a vector or a square matrix")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])

    @property
    def is_diagonal(self) -> bool:
        return self.cov.ndim == 1

    def full_cov(self) -> np.ndarray:
        return np.diag(self.cov) if self.is_diagonal else np.asarray(self.cov)


Gaussian = Union[Gaussian2, GaussianD]


def log_pdf(x: Sequence[float], g: Gaussian) -> float:
    """Log density of ``x`` under the Gaussian ``g``."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != g.dim:
        raise DimensionMismatch(f"point has dim {x.shape[0]}, Gaussian has {g.dim}")
    diff = x - g.mean
    if isinstance(g, GaussianD) and g.is_diagonal:
        var = g.cov
        maha = float(np.sum(diff * diff / var))
        logdet = float(np.sum(np.log(var)))
    else:
        chol = _cholesky_pivots(np.asarray(g.cov))
        if chol is None:
            raise DegenerateCovariance("covariance is not positive definite")
        sol = np.linalg.solve(chol, diff)
        maha = float(sol @ sol)
        logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    return -0.5 * (g.dim * LOG_2PI + logdet + maha)


def pdf(x: Sequence[float], g: Gaussian) -> float:
    return float(np.exp(log_pdf(x, g)))


def kl_divergence(a: Gaussian2, b: Gaussian2) -> float:
    """One-way KL divergence from ``a`` to ``b`` for bivariate Gaussians.

    0.5 * (tr(Sa Sb^-1) - log|Sa Sb^-1| + (ma-mb)' Sb^-1 (ma-mb) - 2).
    """
    chol_b = _cholesky_pivots(np.asarray(b.cov))
    chol_a = _cholesky_pivots(np.asarray(a.cov))
    if chol_a is None or chol_b is None:
        raise DegenerateCovariance("covariance is not positive definite")
    # tr(Sa Sb^-1) via triangular solves against the Cholesky factor of Sb
    w = np.linalg.solve(chol_b, np.asarray(a.cov))
    w = np.linalg.solve(chol_b, w.T)
    trace_term = float(np.trace(w))
    logdet_a = 2.0 * float(np.sum(np.log(np.diag(chol_a))))
    logdet_b = 2.0 * float(np.sum(np.log(np.diag(chol_b))))
    diff = a.mean - b.mean
    sol = np.linalg.solve(chol_b, diff)
    maha = float(sol @ sol)
    # clamp float residue from the triangular solves; KL is >= 0 exactly
    return max(0.0, 0.5 * (trace_term - (logdet_a - logdet_b) + maha - 2.0))


def kl2(a: Gaussian2, b: Gaussian2) -> float:
    """Symmetrized KL: the average of the two one-way divergences."""
    return 0.5 * (kl_divergence(a, b) + kl_divergence(b, a))


def bivariate_log_densities(points: np.ndarray, means: np.ndarray, covs: np.ndarray) -> np.ndarray:
    """(M, K) log densities of M points under K bivariate Gaussians.

    Uses the closed-form 2x2 inverse; callers guarantee positive definite
    covariances (det > 0 is asserted defensively).
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    means = np.asarray(means, dtype=np.float64).reshape(-1, 2)
    covs = np.asarray(covs, dtype=np.float64).reshape(-1, 2, 2)
    s11 = covs[:, 0, 0]
    s12 = covs[:, 0, 1]
    s22 = covs[:, 1, 1]
    det = s11 * s22 - s12 * s12
    if np.any(det <= 0):
        raise DegenerateCovariance("a covariance in the batch is not positive definite")
    dx = points[:, None, 0] - means[None, :, 0]
    dy = points[:, None, 1] - means[None, :, 1]
    maha = (s22 * dx * dx - 2.0 * s12 * dx * dy + s11 * dy * dy) / det
    return -(LOG_2PI + 0.5 * np.log(det))[None, :] - 0.5 * maha


class EmptyMixture(InvalidMatrix):
    pass


@dataclass(frozen=True)
class Mixture:
    """Finite Gaussian mixture with weights on the simplex."""

    weights: np.ndarray
    components: tuple

    def __post_init__(self):
        weights = _freeze(np.asarray(self.weights, dtype=np.float64).reshape(-1))
        components = tuple(self.components)
        if len(components) < 1:
            raise EmptyMixture("mixture needs at least one component")
        if weights.shape[0] != len(components):
            raise DimensionMismatch("weight count must match component count")
        if np.any(weights < 0) or abs(float(np.sum(weights)) - 1.0) > 1e-9:
            raise InvalidMatrix("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "components", components)

    @property
    def k(self) -> int:
        return len(self.components)

    def log_pdf(self, x: Sequence[float]) -> float:
        logs = np.array([log_pdf(x, g) for g in self.components])
        with np.errstate(divide="ignore"):
            logw = np.log(self.weights)
        return float(logsumexp(logw + logs))

    def pdf(self, x: Sequence[float]) -> float:
        return float(np.exp(self.log_pdf(x)))


def logsumexp(v: np.ndarray, axis=None) -> np.ndarray:
    """Numerically stable log-sum-exp; tolerates -inf entries."""
    v = np.asarray(v, dtype=np.float64)
    m = np.max(v, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):  # all -inf rows are legal
        out = np.log(np.sum(np.exp(v - m), axis=axis, keepdims=True)) + m
    if axis is None:
        return out.reshape(())
    return np.squeeze(out, axis=axis)
