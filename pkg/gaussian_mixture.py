"""
Gaussian component and mixture value types with pruning, merging and capping
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.stats import multivariate_normal

from exceptions import DataError, NumericalError

logger = logging.getLogger(__name__)

# Smallest admissible squared Cholesky pivot
PIVOT_TOLERANCE = 1e-12


def symmetrize(matrices: np.ndarray) -> np.ndarray:
    """Return (P + Pᵀ)/2 for a single matrix or a stack of matrices."""
    return 0.5 * (matrices + np.swapaxes(matrices, -1, -2))


def batched_cholesky(matrices: np.ndarray, what: str = "covariance") -> np.ndarray:
    """
    Lower Cholesky factors of a stack of symmetric matrices.

    Raises NumericalError when any matrix is not positive definite or has a
    pivot below PIVOT_TOLERANCE.
    """
    try:
        factors = np.linalg.cholesky(matrices)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"{what} is not positive definite") from exc

    pivots = np.diagonal(factors, axis1=-2, axis2=-1) ** 2
    if pivots.size and (not np.all(np.isfinite(pivots)) or pivots.min() <= PIVOT_TOLERANCE):
        raise NumericalError(f"{what} is numerically singular (pivot <= {PIVOT_TOLERANCE:g})")
    return factors


def gaussian_log_table(residuals: np.ndarray, factors: np.ndarray) -> np.ndarray:
    """
    Log normal densities for a table of residuals.

    residuals has shape (J, m, M) and factors (J, M, M) holds the Cholesky factor
    of the covariance belonging to row j. Returns the (J, m) table of
    log N(r; 0, LLᵀ).
    """
    J, m, M = residuals.shape
    if m == 0:
        return np.zeros((J, 0))

    # whiten every residual row with its own factor: solve L y = r
    whitened = np.linalg.solve(factors[:, None, :, :], residuals[..., None])[..., 0]
    mahalanobis = np.einsum("jmk,jmk->jm", whitened, whitened)
    log_det = 2.0 * np.sum(np.log(np.diagonal(factors, axis1=-2, axis2=-1)), axis=-1)
    return -0.5 * (M * np.log(2.0 * np.pi) + log_det[:, None] + mahalanobis)


@dataclass(frozen=True, eq=False)
class GaussianComponent:
    """Weighted Gaussian term of a PHD intensity"""

    weight: float
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        covariance = symmetrize(np.array(self.covariance, dtype=float))

        if covariance.shape != (mean.size, mean.size):
            raise DataError(
                f"Covariance shape {covariance.shape} does not match mean dimension {mean.size}"
            )
        if not np.isfinite(self.weight) or self.weight < 0:
            raise DataError(f"Component weight must be finite and non-negative, got {self.weight}")
        batched_cholesky(covariance[None], what="component covariance")

        mean.flags.writeable = False
        covariance.flags.writeable = False
        object.__setattr__(self, "weight", float(self.weight))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", covariance)

    @property
    def dimension(self) -> int:
        return self.mean.size


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """
    Ordered set of Gaussian components stored as stacked arrays.

    weights has shape (J,), means (J, N) and covariances (J, N, N). The total mass
    of a PHD mixture is its expected object count.
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float).reshape(-1)
        means = np.array(self.means, dtype=float)
        covariances = np.array(self.covariances, dtype=float)

        if means.ndim != 2 or covariances.ndim != 3:
            raise DataError("Mixture means must be (J, N) and covariances (J, N, N)")
        J, N = means.shape
        if weights.shape != (J,) or covariances.shape != (J, N, N):
            raise DataError(
                f"Inconsistent mixture shapes: weights {weights.shape}, "
                f"means {means.shape}, covariances {covariances.shape}"
            )
        if N < 1:
            raise DataError("Mixture dimension must be positive")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise DataError("Mixture weights must be finite and non-negative")

        covariances = symmetrize(covariances)
        if J:
            batched_cholesky(covariances, what="mixture covariance")

        for array in (weights, means, covariances):
            array.flags.writeable = False
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covariances", covariances)

    @classmethod
    def empty(cls, dimension: int) -> "GaussianMixture":
        return cls(np.zeros(0), np.zeros((0, dimension)), np.zeros((0, dimension, dimension)))

    @classmethod
    def from_components(cls, components: Iterable[GaussianComponent], dimension: int = None) -> "GaussianMixture":
        components = list(components)
        if not components:
            if dimension is None:
                raise DataError("Dimension is required for an empty mixture")
            return cls.empty(dimension)

        dims = {c.dimension for c in components}
        if len(dims) != 1 or (dimension is not None and dims != {dimension}):
            raise DataError(f"Components disagree on dimension: {sorted(dims)}")
        return cls(
            np.array([c.weight for c in components]),
            np.stack([c.mean for c in components]),
            np.stack([c.covariance for c in components]),
        )

    @property
    def dimension(self) -> int:
        return self.means.shape[1]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def components(self) -> Tuple[GaussianComponent, ...]:
        return tuple(
            GaussianComponent(w, m, P) for w, m, P in zip(self.weights, self.means, self.covariances)
        )

    def __len__(self) -> int:
        return self.weights.size

    def __iter__(self) -> Iterator[GaussianComponent]:
        return iter(self.components)

    def select(self, indices) -> "GaussianMixture":
        """Sub-mixture with the given component indices, in the given order."""
        indices = np.asarray(indices, dtype=int)
        return GaussianMixture(self.weights[indices], self.means[indices], self.covariances[indices])

    def scaled(self, factor: float) -> "GaussianMixture":
        return GaussianMixture(self.weights * factor, self.means, self.covariances)

    def concat(self, other: "GaussianMixture") -> "GaussianMixture":
        if other.dimension != self.dimension:
            raise DataError(f"Cannot join mixtures of dimension {self.dimension} and {other.dimension}")
        return GaussianMixture(
            np.concatenate([self.weights, other.weights]),
            np.concatenate([self.means, other.means]),
            np.concatenate([self.covariances, other.covariances]),
        )


def evaluate_density(component: GaussianComponent, point) -> float:
    """Return weight × N(point; mean, covariance)."""
    point = np.asarray(point, dtype=float).reshape(-1)
    if point.size != component.dimension:
        raise DataError(f"Point has dimension {point.size}, component has {component.dimension}")
    density = multivariate_normal.pdf(point, mean=component.mean, cov=component.covariance)
    return component.weight * float(density)


def _rescale_to(mixture: GaussianMixture, target_mass: float) -> GaussianMixture:
    kept_mass = mixture.total_mass
    if len(mixture) == 0 or kept_mass <= 0 or kept_mass == target_mass:
        return mixture
    return mixture.scaled(target_mass / kept_mass)


def prune(mixture: GaussianMixture, threshold_T: float) -> GaussianMixture:
    """
    Drop components with weight below threshold_T.

    The surviving weights are rescaled so the total mass (expected object count)
    is unchanged.
    """
    if threshold_T < 0:
        raise ValueError("Pruning threshold cannot be negative")

    keep = np.flatnonzero(mixture.weights >= threshold_T)
    if keep.size == len(mixture):
        return mixture
    if keep.size == 0:
        logger.debug("Pruning removed all %d components", len(mixture))
        return GaussianMixture.empty(mixture.dimension)

    logger.debug("Pruned %d of %d components", len(mixture) - keep.size, len(mixture))
    return _rescale_to(mixture.select(keep), mixture.total_mass)


def _moment_match(weights: np.ndarray, means: np.ndarray, covariances: np.ndarray):
    total = weights.sum()
    shares = weights / total if total > 0 else np.full(weights.size, 1.0 / weights.size)
    mean = shares @ means
    spread = means - mean
    covariance = np.einsum("k,kij->ij", shares, covariances) + np.einsum("k,ki,kj->ij", shares, spread, spread)
    return total, mean, symmetrize(covariance)


def merge(mixture: GaussianMixture, threshold_U: float) -> GaussianMixture:
    """
    Greedy moment-matched merging, repeated until a pass merges nothing.

    In each pass the heaviest unprocessed component i absorbs every unprocessed
    component j with (µ_i − µ_j)ᵀ P_i⁻¹ (µ_i − µ_j) <= threshold_U, and each
    component is merged at most once. A mixture with nothing left to merge is
    returned unchanged, so merge(merge(M, U), U) is merge(M, U).
    """
    if threshold_U <= 0:
        raise ValueError("Merging threshold must be positive")

    current = mixture
    while len(current) > 1:
        merged = _merge_pass(current, threshold_U)
        if len(merged) == len(current):
            break
        current = merged

    if len(current) < len(mixture):
        logger.debug("Merged %d components into %d", len(mixture), len(current))
    return current


def _merge_pass(mixture: GaussianMixture, threshold_U: float) -> GaussianMixture:
    """One greedy pass; the output is ordered by anchor weight."""
    order = np.argsort(-mixture.weights, kind="stable")
    unprocessed = np.ones(len(mixture), dtype=bool)
    weights, means, covariances = [], [], []

    for anchor in order:
        if not unprocessed[anchor]:
            continue
        candidates = np.flatnonzero(unprocessed)
        diff = mixture.means[candidates] - mixture.means[anchor]
        try:
            factor = cho_factor(mixture.covariances[anchor], lower=True)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("Anchor covariance is singular during merging") from exc
        distances = np.einsum("kn,nk->k", diff, cho_solve(factor, diff.T))
        members = candidates[distances <= threshold_U]
        unprocessed[members] = False

        if members.size == 1:
            weights.append(mixture.weights[anchor])
            means.append(mixture.means[anchor])
            covariances.append(mixture.covariances[anchor])
            continue

        w, m, P = _moment_match(
            mixture.weights[members], mixture.means[members], mixture.covariances[members]
        )
        weights.append(w)
        means.append(m)
        covariances.append(P)

    return GaussianMixture(np.array(weights), np.stack(means), np.stack(covariances))


def cap_components(mixture: GaussianMixture, J_max: int) -> GaussianMixture:
    """Keep the J_max heaviest components, preserving total mass."""
    if J_max < 1:
        raise ValueError("J_max must be at least 1")
    if len(mixture) <= J_max:
        return mixture

    keep = np.argsort(-mixture.weights, kind="stable")[:J_max]
    logger.debug("Capped mixture from %d to %d components", len(mixture), J_max)
    return _rescale_to(mixture.select(keep), mixture.total_mass)
