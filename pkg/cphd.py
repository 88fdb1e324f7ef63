"""
Clutter-free Gaussian-mixture CPHD recursion.

One cycle is predict -> update (correct + mixture reduction) -> extract. The
update needs one Gaussian evaluation per (component, measurement) pair, so its
cost is linear in both the component count and the measurement count.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterator, List, NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy
from scipy.stats import binom

from cardinality import CardinalityDistribution
from dynamics import BirthModel, MeasurementModel, MotionModel, STATE_DIM
from exceptions import CardinalitySupportError, DataError, NumericalError
from gaussian_mixture import (
    GaussianMixture,
    batched_cholesky,
    cap_components,
    gaussian_log_table,
    merge,
    prune,
    symmetrize,
)
from models import FilterConfig

logger = logging.getLogger(__name__)

DEFAULT_PRIOR_VARIANCE = 100.0


@dataclass(frozen=True, eq=False)
class FilterState:
    """PHD intensity plus cardinality distribution after `time_index` frames (-1 = prior)"""

    intensity: GaussianMixture
    cardinality: CardinalityDistribution
    time_index: int = -1

    @property
    def expected_cardinality(self) -> float:
        return self.cardinality.mean

    @property
    def cardinality_gap(self) -> float:
        """|intensity mass − Σ n·p(n)|, the mass/cardinality consistency diagnostic."""
        return abs(self.intensity.total_mass - self.cardinality.mean)


class Estimate(NamedTuple):
    state: np.ndarray
    weight: float


@dataclass(frozen=True)
class Extraction:
    """MAP-count state estimates for one frame"""

    time_index: int
    map_cardinality: int
    estimates: List[Estimate] = field(default_factory=list)
    shortfall: bool = False

    def __len__(self) -> int:
        return len(self.estimates)

    def __iter__(self) -> Iterator[Estimate]:
        return iter(self.estimates)

    @property
    def states(self) -> List[np.ndarray]:
        return [estimate.state for estimate in self.estimates]


def init(
    config: FilterConfig,
    prior: Optional[GaussianMixture] = None,
    time_index: int = -1,
) -> FilterState:
    """
    Initial state: cardinality concentrated on a single object.

    Without a prior the intensity is one broad component (weight 1, mean 0,
    covariance 100·I).
    """
    if prior is None:
        prior = GaussianMixture(
            np.ones(1),
            np.zeros((1, STATE_DIM)),
            DEFAULT_PRIOR_VARIANCE * np.eye(STATE_DIM)[None],
        )
    return FilterState(prior, CardinalityDistribution.point_mass(1, config.N_card_max), time_index)


def predict_cardinality(
    cardinality: CardinalityDistribution, p_S: float, birth_pmf: CardinalityDistribution
) -> CardinalityDistribution:
    """
    p_pred(n) = Σ_j p_B(n−j) Σ_{l>=j} C(l, j) p_S^j (1−p_S)^{l−j} p(l), truncated at n_max.
    """
    n_max = cardinality.n_max
    support = np.arange(n_max + 1)
    # thinning[l, j] = P(j of l objects survive)
    thinning = binom.pmf(support[None, :], support[:, None], p_S)
    survived = cardinality.probs @ thinning
    births = birth_pmf.resized(n_max).probs
    return CardinalityDistribution(np.convolve(survived, births)[: n_max + 1])


def predict(state: FilterState, motion: MotionModel, birth: BirthModel) -> FilterState:
    """Propagate intensity and cardinality one step ahead."""
    prior = state.intensity
    if motion.dimension != prior.dimension or birth.intensity.dimension != prior.dimension:
        raise DataError(
            f"Model dimensions (motion {motion.dimension}, birth {birth.intensity.dimension}) "
            f"do not match the state dimension {prior.dimension}"
        )

    F, Q = motion.F, motion.Q
    intensity = birth.intensity
    if len(prior) and motion.p_S > 0:
        survived = GaussianMixture(
            motion.p_S * prior.weights,
            prior.means @ F.T,
            Q + np.einsum("ij,kjl,ml->kim", F, prior.covariances, F),
        )
        intensity = intensity.concat(survived)

    cardinality = predict_cardinality(state.cardinality, motion.p_S, birth.cardinality_pmf)
    return FilterState(intensity, cardinality, state.time_index + 1)


def _log_permutation_terms(
    log_probs: np.ndarray, m: int, q_D: float = 0.0
) -> np.ndarray:
    """log(P^n_m · q_D^(n−m) · p(n)) for every n, with −inf where n < m."""
    n = np.arange(log_probs.size)
    out = np.full(log_probs.size, -np.inf)
    valid = n >= m
    nv = n[valid]
    out[valid] = gammaln(nv + 1) - gammaln(nv - m + 1) + xlogy(nv - m, q_D) + log_probs[valid]
    return out


def _as_measurement_array(measurements, dim: int) -> np.ndarray:
    Z = np.asarray(measurements, dtype=float)
    if Z.size == 0:
        return np.zeros((0, dim))
    if Z.ndim == 1:
        Z = Z.reshape(1, -1)
    if Z.ndim != 2 or Z.shape[1] != dim:
        raise DataError(f"Measurements must be {dim}-vectors, got array of shape {Z.shape}")
    return Z


def correct(state: FilterState, measurements: Sequence, meas_model: MeasurementModel) -> FilterState:
    """
    Clutter-free CPHD measurement update without mixture reduction.

    Returns the missed-detection components followed by the detection
    components, ordered measurement by measurement.
    """
    predicted = state.intensity
    Z = _as_measurement_array(measurements, meas_model.measurement_dim)
    m = Z.shape[0]
    n_max = state.cardinality.n_max
    if m > n_max:
        raise CardinalitySupportError(
            f"Frame {state.time_index} has {m} measurements but the cardinality support ends at {n_max}"
        )
    if meas_model.H.shape[1] != predicted.dimension:
        raise DataError("Measurement matrix does not match the state dimension")

    q_D, p_D = meas_model.q_D, meas_model.p_D
    with np.errstate(divide="ignore"):
        log_probs = np.log(state.cardinality.probs)

    denominator_terms = _log_permutation_terms(log_probs, m, q_D=q_D)
    log_denominator = logsumexp(denominator_terms)
    if not np.isfinite(log_denominator):
        raise NumericalError(
            f"Predicted cardinality has no mass at n >= {m} (frame {state.time_index})"
        )
    cardinality = CardinalityDistribution(np.exp(denominator_terms - log_denominator))

    mass = predicted.total_mass
    intensity = GaussianMixture.empty(predicted.dimension)
    if q_D > 0 and len(predicted) and mass > 0:
        log_numerator = logsumexp(_log_permutation_terms(log_probs, m + 1, q_D=q_D)) if m < n_max else -np.inf
        ratio = np.exp(log_numerator - log_denominator) / mass if np.isfinite(log_numerator) else 0.0
        intensity = predicted.scaled(q_D * ratio)

    if m:
        intensity = intensity.concat(_detection_terms(predicted, Z, meas_model, p_D))

    return FilterState(intensity, cardinality, state.time_index)


def _detection_terms(
    predicted: GaussianMixture, Z: np.ndarray, meas_model: MeasurementModel, p_D: float
) -> GaussianMixture:
    J, N = predicted.means.shape
    m = Z.shape[0]
    if J == 0:
        raise NumericalError(f"{m} measurement(s) received but the predicted intensity is empty")

    H, R = meas_model.H, meas_model.R
    P = predicted.covariances
    innovation = R + np.einsum("ij,kjl,ml->kim", H, P, H)
    factors = batched_cholesky(innovation, what="innovation covariance")

    residuals = Z[None, :, :] - (predicted.means @ H.T)[:, None, :]
    with np.errstate(divide="ignore"):
        log_weighted = np.log(predicted.weights)[:, None] + gaussian_log_table(residuals, factors)
    log_normalizer = logsumexp(log_weighted, axis=0)
    unexplained = np.flatnonzero(~np.isfinite(log_normalizer))
    if unexplained.size:
        raise NumericalError(f"Measurement(s) {unexplained.tolist()} are not explained by any component")
    shares = np.exp(log_weighted - log_normalizer[None, :])

    identity = np.eye(meas_model.measurement_dim)
    inverse_factors = np.linalg.solve(factors, np.broadcast_to(identity, factors.shape))
    innovation_inverse = np.einsum("kji,kjl->kil", inverse_factors, inverse_factors)
    gains = P @ H.T @ innovation_inverse
    posterior_cov = symmetrize((np.eye(N) - gains @ H) @ P)
    posterior_means = predicted.means[:, None, :] + np.einsum("kni,kmi->kmn", gains, residuals)

    return GaussianMixture(
        p_D * shares.T.reshape(-1),
        posterior_means.transpose(1, 0, 2).reshape(-1, N),
        np.broadcast_to(posterior_cov, (m, J, N, N)).reshape(-1, N, N),
    )


def reduce_mixture(state: FilterState, config: FilterConfig) -> FilterState:
    """Prune -> merge -> cap."""
    intensity = prune(state.intensity, config.prune_T)
    intensity = merge(intensity, config.merge_U)
    intensity = cap_components(intensity, config.J_max)
    return FilterState(intensity, state.cardinality, state.time_index)


def update(
    state: FilterState,
    measurements: Sequence,
    meas_model: MeasurementModel,
    config: FilterConfig,
) -> FilterState:
    """Measurement update followed by mixture reduction."""
    return reduce_mixture(correct(state, measurements, meas_model), config)


def extract(state: FilterState) -> Extraction:
    """Means of the n̂ heaviest components, n̂ the MAP cardinality."""
    n_hat = state.cardinality.map_estimate
    intensity = state.intensity
    order = np.argsort(-intensity.weights, kind="stable")[:n_hat]
    shortfall = len(intensity) < n_hat
    if shortfall:
        logger.debug(
            "Frame %d: MAP count %d exceeds the %d available components",
            state.time_index,
            n_hat,
            len(intensity),
        )
    estimates = [Estimate(intensity.means[i].copy(), float(intensity.weights[i])) for i in order]
    return Extraction(state.time_index, n_hat, estimates, shortfall)
