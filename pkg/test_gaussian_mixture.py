#!/usr/bin/env python3
"""
Tests for Gaussian mixture value types, pruning, merging and capping
"""

import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from exceptions import DataError, NumericalError
from gaussian_mixture import (
    GaussianComponent,
    GaussianMixture,
    batched_cholesky,
    cap_components,
    evaluate_density,
    gaussian_log_table,
    merge,
    prune,
)


def _mixture(weights, means, scale=1.0):
    means = np.asarray(means, dtype=float)
    covs = np.repeat(scale * np.eye(means.shape[1])[None], len(weights), axis=0)
    return GaussianMixture(np.asarray(weights, dtype=float), means, covs)


def test_component_validation():
    component = GaussianComponent(0.5, [1.0, 2.0], [[2.0, 0.1], [0.1, 1.0]])
    assert component.dimension == 2
    assert not component.mean.flags.writeable

    with pytest.raises(DataError):
        GaussianComponent(-0.1, [0.0], [[1.0]])
    with pytest.raises(DataError):
        GaussianComponent(1.0, [0.0, 0.0], [[1.0]])
    with pytest.raises(NumericalError):
        GaussianComponent(1.0, [0.0, 0.0], [[1.0, 0.0], [0.0, 0.0]])


def test_mixture_shapes_and_mass():
    mixture = _mixture([0.2, 0.3, 0.5], [[0, 0], [1, 1], [2, 2]])
    assert len(mixture) == 3
    assert mixture.dimension == 2
    assert mixture.total_mass == pytest.approx(1.0)
    assert [c.weight for c in mixture] == pytest.approx([0.2, 0.3, 0.5])

    rebuilt = GaussianMixture.from_components(mixture.components)
    np.testing.assert_array_equal(rebuilt.means, mixture.means)

    empty = GaussianMixture.empty(4)
    assert len(empty) == 0 and empty.total_mass == 0.0
    assert len(empty.concat(_mixture([1.0], [[0, 0, 0, 0]]))) == 1

    with pytest.raises(DataError):
        GaussianMixture(np.ones(2), np.zeros((3, 2)), np.repeat(np.eye(2)[None], 3, axis=0))


def test_batched_cholesky_rejects_singular():
    stack = np.stack([np.eye(2), np.diag([1.0, 1e-14])])
    with pytest.raises(NumericalError):
        batched_cholesky(stack, what="test covariance")


def test_log_table_matches_scipy():
    rng = np.random.default_rng(0)
    covs = []
    for _ in range(3):
        A = rng.normal(size=(2, 2))
        covs.append(A @ A.T + np.eye(2))
    covs = np.stack(covs)
    residuals = rng.normal(size=(3, 4, 2))

    table = gaussian_log_table(residuals, np.linalg.cholesky(covs))
    for j in range(3):
        expected = multivariate_normal.logpdf(residuals[j], mean=np.zeros(2), cov=covs[j])
        np.testing.assert_allclose(table[j], expected, rtol=1e-12, atol=1e-12)


def test_evaluate_density():
    component = GaussianComponent(0.4, [1.0, -1.0], np.diag([2.0, 0.5]))
    expected = 0.4 * multivariate_normal.pdf([0.5, 0.0], mean=[1.0, -1.0], cov=np.diag([2.0, 0.5]))
    assert evaluate_density(component, [0.5, 0.0]) == pytest.approx(expected, rel=1e-12)

    with pytest.raises(DataError):
        evaluate_density(component, [0.0, 0.0, 0.0])


def test_density_literal_values():
    standard = GaussianComponent(1.0, [0.0, 0.0], np.eye(2))
    assert evaluate_density(standard, [0.0, 0.0]) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-12)
    doubled = GaussianComponent(2.0, [0.0, 0.0], np.eye(2))
    assert evaluate_density(doubled, [0.0, 0.0]) == pytest.approx(1.0 / math.pi, rel=1e-12)


def test_density_against_quadratic_form():
    component = GaussianComponent(1.0, [1.0, 1.0], np.diag([4.0, 9.0]))
    # residual (2, 3): quadratic form 2²/4 + 3²/9 = 2, determinant 36
    expected = math.exp(-0.5 * 2.0) / (2.0 * math.pi * math.sqrt(36.0))
    assert evaluate_density(component, [3.0, 4.0]) == pytest.approx(expected, rel=1e-12)


def test_prune_preserves_mass():
    mixture = _mixture([0.6, 1e-6, 0.4, 5e-6], [[0, 0], [1, 0], [2, 0], [3, 0]])
    pruned = prune(mixture, 1e-5)
    assert len(pruned) == 2
    assert pruned.total_mass == pytest.approx(mixture.total_mass, abs=1e-15)
    np.testing.assert_allclose(pruned.weights / pruned.weights.sum(), [0.6, 0.4])

    assert len(prune(_mixture([1e-9], [[0, 0]]), 1e-5)) == 0
    assert prune(mixture, 0.0) is mixture


def test_prune_random_mixture_conserves_mass():
    rng = np.random.default_rng(11)
    weights = rng.exponential(1e-4, size=200)
    mixture = _mixture(weights, rng.normal(size=(200, 4)))
    pruned = prune(mixture, 1e-5)
    assert len(pruned) < 200
    assert np.all(pruned.weights > 0)
    assert pruned.total_mass == pytest.approx(weights.sum(), rel=1e-12)


def _cluster():
    weights = np.array([0.5, 0.3, 0.2])
    means = np.array([[0.0, 0.0], [0.03, 0.02], [-0.02, 0.01]])
    covs = np.stack([np.eye(2), np.diag([2.0, 1.0]), np.array([[1.5, 0.2], [0.2, 1.0]])])
    return GaussianMixture(weights, means, covs)


def test_merge_cluster_matches_sub_mixture_moments():
    mixture = _cluster()
    merged = merge(mixture, 0.004)
    assert len(merged) == 1

    w = mixture.weights
    mean = sum(w[k] * mixture.means[k] for k in range(3)) / w.sum()
    second = sum(w[k] * (mixture.covariances[k] + np.outer(mixture.means[k], mixture.means[k])) for k in range(3)) / w.sum()
    assert merged.weights[0] == pytest.approx(1.0, rel=1e-12)
    np.testing.assert_allclose(merged.means[0], mean, atol=1e-14)
    np.testing.assert_allclose(merged.covariances[0], second - np.outer(mean, mean), atol=1e-12)


def test_merged_spread_is_positive_semidefinite():
    mixture = _cluster()
    merged = merge(mixture, 0.004)
    average = np.einsum("k,kij->ij", mixture.weights / mixture.total_mass, mixture.covariances)
    assert np.linalg.eigvalsh(merged.covariances[0] - average).min() >= -1e-12


def test_merge_identical_components():
    covariance = np.array([[2.0, 0.3], [0.3, 1.0]])
    mixture = GaussianMixture([0.35, 0.35], [[4.0, -1.0], [4.0, -1.0]], np.stack([covariance, covariance]))
    merged = merge(mixture, 1e-9)
    assert len(merged) == 1
    assert merged.weights[0] == pytest.approx(0.7)
    np.testing.assert_allclose(merged.means[0], [4.0, -1.0])
    np.testing.assert_allclose(merged.covariances[0], covariance, atol=1e-15)


def test_merge_repeats_until_stable():
    # the first greedy pass pulls the heaviest pair's mean within reach of x = 0.09
    mixture = _mixture([1.0, 0.9, 0.8], [[0.0, 0.0], [0.06, 0.0], [0.09, 0.0]])
    merged = merge(mixture, 0.004)
    assert len(merged) == 1
    assert merged.total_mass == pytest.approx(2.7, rel=1e-12)
    np.testing.assert_allclose(merged.means[0], [(0.9 * 0.06 + 0.8 * 0.09) / 2.7, 0.0])


def test_merge_is_idempotent():
    rng = np.random.default_rng(5)
    mixture = _mixture(rng.uniform(0.01, 1.0, size=60), rng.normal(scale=0.05, size=(60, 4)), scale=0.5)
    once = merge(mixture, 0.004)
    twice = merge(once, 0.004)
    assert len(twice) == len(once)
    np.testing.assert_allclose(twice.weights, once.weights, atol=1e-9)
    np.testing.assert_allclose(twice.means, once.means, atol=1e-9)
    np.testing.assert_allclose(twice.covariances, once.covariances, atol=1e-9)
    assert once.total_mass == pytest.approx(mixture.total_mass, rel=1e-12)


def test_merge_moment_matching():
    means = [[0.0, 0.0], [0.01, 0.0], [50.0, 50.0]]
    mixture = _mixture([0.6, 0.2, 0.5], means)
    merged = merge(mixture, 0.004)

    assert len(merged) == 2
    assert merged.total_mass == pytest.approx(mixture.total_mass)
    # heaviest anchor first
    assert merged.weights[0] == pytest.approx(0.8)
    np.testing.assert_allclose(merged.means[0], [0.0025, 0.0])
    spread = 0.75 * 0.25 * 0.01**2
    np.testing.assert_allclose(merged.covariances[0], np.eye(2) + np.diag([spread, 0.0]), atol=1e-15)
    np.testing.assert_array_equal(merged.means[1], [50.0, 50.0])


def test_merge_keeps_separated_components():
    mixture = _mixture([0.3, 0.3], [[0.0, 0.0], [1.0, 0.0]])
    merged = merge(mixture, 0.004)
    assert len(merged) == 2
    np.testing.assert_array_equal(np.sort(merged.means[:, 0]), [0.0, 1.0])


def test_cap_keeps_heaviest():
    mixture = _mixture([0.1, 0.5, 0.3, 0.2], [[0, 0], [1, 0], [2, 0], [3, 0]])
    capped = cap_components(mixture, 2)
    assert len(capped) == 2
    np.testing.assert_array_equal(capped.means[:, 0], [1.0, 2.0])
    assert capped.total_mass == pytest.approx(1.1)

    with pytest.raises(ValueError):
        cap_components(mixture, 0)


def test_cap_random_mixture_conserves_mass():
    rng = np.random.default_rng(3)
    weights = rng.uniform(0.0, 0.1, size=300)
    mixture = _mixture(weights, rng.normal(size=(300, 4)))
    capped = cap_components(mixture, 200)
    assert len(capped) == 200
    assert capped.total_mass == pytest.approx(weights.sum(), rel=1e-12)
    kept = np.sort(capped.weights / capped.weights.sum())[::-1]
    heaviest = np.sort(weights)[::-1][:200]
    np.testing.assert_allclose(kept, heaviest / heaviest.sum(), rtol=1e-12)

    few = _mixture([0.2, 0.2, 0.2, 0.2, 0.2], np.zeros((5, 2)) + np.arange(5)[:, None])
    assert cap_components(few, 5) is few


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
