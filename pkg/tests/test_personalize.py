"""MAP adaptation limits and formula checks against loop oracles."""
import numpy as np
import pytest

from conftest import make_pd
from aeg.acoustic import TopicPosterior
from aeg.affective import AffectiveGMM, Provenance
from aeg.errors import EmptyInput
from aeg.gaussians import Gaussian2, is_positive_definite, log_pdf
from aeg.personalize import AdaptConfig, PersonalDatum, adapt_incrementally, map_adapt


def _background(rng, k=3):
    return AffectiveGMM(
        topic_indices=tuple(range(k)),
        means=rng.uniform(-0.7, 0.7, (k, 2)),
        covs=np.array([make_pd(rng, scale=0.15, jitter=0.02) for _ in range(k)]),
        k_original=k,
        provenance=Provenance.UNIFORM,
    )


def _datum(theta, e):
    theta = np.asarray(theta, dtype=float)
    return PersonalDatum(theta=TopicPosterior(clip_id="x", theta=theta), e=np.asarray(e, dtype=float))


def _resp_oracle(bg, data):
    """p(z_k | e_i, theta_i) by plain loops."""
    out = []
    for d in data:
        w = bg.restrict_theta(d.theta.theta)
        dens = np.array([
            w[c] * np.exp(log_pdf(d.e, Gaussian2(bg.means[c], bg.covs[c])))
            for c in range(bg.n_components)
        ])
        out.append(dens / dens.sum())
    return np.array(out)


def test_untouched_component_is_bit_identical():
    rng = np.random.default_rng(0)
    bg = _background(rng)
    # all adaptation mass on topic 0
    data = [_datum([1.0, 0.0, 0.0], rng.uniform(-0.5, 0.5, 2)) for _ in range(4)]
    adapted = map_adapt(bg, data)
    assert not np.array_equal(adapted.means[0], bg.means[0])
    assert np.array_equal(adapted.means[1], bg.means[1])
    assert np.array_equal(adapted.means[2], bg.means[2])
    assert np.array_equal(adapted.covs, bg.covs)  # covariances off by default
    assert adapted.provenance is Provenance.ADAPTED


def test_beta_zero_is_full_adaptation():
    rng = np.random.default_rng(1)
    bg = _background(rng)
    data = [_datum(rng.dirichlet(np.ones(3)), rng.uniform(-0.6, 0.6, 2)) for _ in range(20)]
    adapted = map_adapt(bg, data, AdaptConfig(beta_mean=0.0))
    resp = _resp_oracle(bg, data)
    pts = np.array([d.e for d in data])
    for c in range(3):
        expected = resp[:, c] @ pts / resp[:, c].sum()
        assert np.max(np.abs(adapted.means[c] - expected)) < 1e-6


def test_beta_infinite_is_noop():
    rng = np.random.default_rng(2)
    bg = _background(rng)
    data = [_datum(rng.dirichlet(np.ones(3)), rng.uniform(-0.6, 0.6, 2)) for _ in range(10)]
    adapted = map_adapt(bg, data, AdaptConfig(beta_mean=1e12, beta_cov=1e12, adapt_cov=True))
    assert np.max(np.abs(adapted.means - bg.means)) < 1e-6
    assert np.max(np.abs(adapted.covs - bg.covs)) < 1e-6


def test_mean_interpolation_matches_formula():
    rng = np.random.default_rng(3)
    bg = _background(rng)
    beta = 0.7
    data = [_datum(rng.dirichlet(np.ones(3)), rng.uniform(-0.6, 0.6, 2)) for _ in range(12)]
    adapted = map_adapt(bg, data, AdaptConfig(beta_mean=beta))
    resp = _resp_oracle(bg, data)
    pts = np.array([d.e for d in data])
    for c in range(3):
        gamma_c = resp[:, c].sum()
        e_mu = resp[:, c] @ pts / gamma_c
        alpha = gamma_c / (gamma_c + beta)
        expected = alpha * e_mu + (1 - alpha) * bg.means[c]
        assert np.max(np.abs(adapted.means[c] - expected)) < 1e-10


def test_covariance_adaptation_matches_formula():
    rng = np.random.default_rng(4)
    bg = _background(rng)
    beta = 0.5
    data = [_datum(rng.dirichlet(np.ones(3)), rng.uniform(-0.6, 0.6, 2)) for _ in range(30)]
    cfg = AdaptConfig(beta_mean=beta, beta_cov=beta, adapt_cov=True)
    adapted = map_adapt(bg, data, cfg)
    resp = _resp_oracle(bg, data)
    pts = np.array([d.e for d in data])
    for c in range(3):
        gamma_c = resp[:, c].sum()
        alpha = gamma_c / (gamma_c + beta)
        e_mu = resp[:, c] @ pts / gamma_c
        diff = pts - e_mu
        e_cov = (resp[:, c][:, None] * diff).T @ diff / gamma_c
        mu_new = alpha * e_mu + (1 - alpha) * bg.means[c]
        expected = (
            alpha * e_cov
            + (1 - alpha) * (bg.covs[c] + np.outer(bg.means[c], bg.means[c]))
            - np.outer(mu_new, mu_new)
        )
        if c not in adapted.cov_fallback_topics:
            assert np.max(np.abs(adapted.covs[c] - expected)) < 1e-9
            assert is_positive_definite(adapted.covs[c])


def test_single_point_covariance_falls_back():
    rng = np.random.default_rng(5)
    bg = _background(rng)
    # full-weight single observation: adapted covariance would be the zero
    # scatter matrix, which is not PD
    data = [_datum([1.0, 0.0, 0.0], [0.2, 0.2])]
    adapted = map_adapt(bg, data, AdaptConfig(beta_mean=0.0, beta_cov=0.0, adapt_cov=True))
    assert 0 in adapted.cov_fallback_topics
    assert np.array_equal(adapted.covs[0], bg.covs[0])
    assert is_positive_definite(adapted.covs[0])


def test_adapt_keeps_topic_structure():
    rng = np.random.default_rng(6)
    bg = AffectiveGMM(
        topic_indices=(0, 2),
        means=rng.uniform(-0.5, 0.5, (2, 2)),
        covs=np.array([make_pd(rng), make_pd(rng)]),
        k_original=3,
        provenance=Provenance.UNIFORM,
        removed_topics=frozenset({1}),
    )
    data = [_datum([0.3, 0.0, 0.7], [0.1, -0.1])]  # full-K theta with removed topic
    adapted = map_adapt(bg, data)
    assert adapted.topic_indices == (0, 2)
    assert adapted.removed_topics == frozenset({1})
    assert adapted.k_original == 3


def test_input_validation():
    rng = np.random.default_rng(7)
    bg = _background(rng)
    with pytest.raises(EmptyInput):
        map_adapt(bg, [])
    with pytest.raises(EmptyInput):
        AdaptConfig(beta_mean=-0.1)
    with pytest.raises(Exception):
        _datum([0.5, 0.5, 0.0], [np.nan, 0.0])
    with pytest.raises(Exception):
        PersonalDatum(theta=TopicPosterior(clip_id="x", theta=np.array([1.0])),
                      e=np.array([0.1, 0.2, 0.3]))


def test_incremental_chaining_equals_manual():
    rng = np.random.default_rng(8)
    bg = _background(rng)
    batches = [
        [_datum(rng.dirichlet(np.ones(3)), rng.uniform(-0.5, 0.5, 2)) for _ in range(5)]
        for _ in range(3)
    ]
    traj = adapt_incrementally(bg, batches)
    assert len(traj) == 3
    manual = bg
    for batch in batches:
        manual = map_adapt(manual, batch)
    assert np.array_equal(traj[-1].means, manual.means)


def test_more_data_pulls_harder():
    rng = np.random.default_rng(9)
    bg = _background(rng)
    target = np.array([0.6, -0.6])
    small = [_datum([1.0, 0.0, 0.0], target) for _ in range(2)]
    large = small * 10
    d_small = np.linalg.norm(map_adapt(bg, small).means[0] - target)
    d_large = np.linalg.norm(map_adapt(bg, large).means[0] - target)
    assert d_large < d_small
