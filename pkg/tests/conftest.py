import numpy as np
import pytest

from aeg.evaluation.synthetic import SyntheticSpec, circular_true_model, synthesize_corpus


def make_pd(rng, scale=0.4, jitter=0.05):
    """Random symmetric positive definite 2x2 matrix."""
    a = rng.standard_normal((2, 2)) * scale
    return a @ a.T + jitter * np.eye(2)


@pytest.fixture(scope="session")
def corner_truth():
    # four isotropic components at the (+-0.5, +-0.5) corners, sigma = 0.1,
    # so neighboring means sit 10 sigma apart
    return circular_true_model(4, radius=float(np.sqrt(0.5)), variance=0.01)


@pytest.fixture(scope="session")
def recovery_data(corner_truth):
    spec = SyntheticSpec(
        true_affective=corner_truth,
        dirichlet_alpha=0.5,
        clips=200,
        subjects_per_clip=20,
        seed=11,
    )
    return synthesize_corpus(spec)


@pytest.fixture(scope="session")
def small_library(corner_truth):
    spec = SyntheticSpec(
        true_affective=corner_truth,
        dirichlet_alpha=0.4,
        clips=60,
        subjects_per_clip=12,
        seed=29,
    )
    return synthesize_corpus(spec)
