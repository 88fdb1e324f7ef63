"""
Linear-Gaussian motion, measurement and birth models.

State ordering is [p_x, v_x, p_y, v_y] (µm, µm/s); measurements are (p_x, p_y) in µm.
"""

from dataclasses import dataclass

import numpy as np

from cardinality import CardinalityDistribution
from exceptions import ConfigError
from gaussian_mixture import GaussianMixture, symmetrize
from models import CVModelParams

STATE_DIM = 4
MEASUREMENT_DIM = 2
POSITION_INDICES = (0, 2)

# birth intensity used for the organelle experiments: one component per quadrant
CORNER_BIRTH_MEANS = (
    (3.0, 0.0, 5.0, 0.0),
    (4.0, 0.0, -6.0, 0.0),
    (-3.0, 0.0, -2.0, 0.0),
    (-4.0, 0.0, 8.0, 0.0),
)
CORNER_BIRTH_WEIGHT = 0.25
CORNER_BIRTH_COVARIANCE_SCALE = 10.0


def _check_probability(name: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must lie in [0, 1], got {value}")
    return float(value)


def _frozen(array) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class MotionModel:
    """x_t | x_{t-1} ~ N(F x_{t-1}, Q) with state-independent survival p_S"""

    F: np.ndarray
    Q: np.ndarray
    p_S: float

    def __post_init__(self):
        F = _frozen(self.F)
        Q = _frozen(symmetrize(np.asarray(self.Q, dtype=float)))
        if F.ndim != 2 or F.shape[0] != F.shape[1] or Q.shape != F.shape:
            raise ConfigError(f"F {F.shape} and Q {Q.shape} must be matching square matrices")
        if np.linalg.eigvalsh(Q).min() < -1e-12 * max(1.0, np.abs(Q).max()):
            raise ConfigError("Process noise covariance Q must be positive semidefinite")
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "p_S", _check_probability("p_S", self.p_S))

    @property
    def dimension(self) -> int:
        return self.F.shape[0]


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """z_t | x_t ~ N(H x_t, R) with state-independent detection p_D"""

    H: np.ndarray
    R: np.ndarray
    p_D: float

    def __post_init__(self):
        H = _frozen(self.H)
        R = _frozen(symmetrize(np.asarray(self.R, dtype=float)))
        if H.ndim != 2 or R.shape != (H.shape[0], H.shape[0]):
            raise ConfigError(f"H {H.shape} and R {R.shape} are inconsistent")
        if np.linalg.eigvalsh(R).min() <= 0:
            raise ConfigError("Measurement noise covariance R must be positive definite")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "p_D", _check_probability("p_D", self.p_D))

    @property
    def q_D(self) -> float:
        return 1.0 - self.p_D

    @property
    def measurement_dim(self) -> int:
        return self.H.shape[0]


@dataclass(frozen=True, eq=False)
class BirthModel:
    """Birth intensity b(x) and the cardinality pmf p_B of the birth process"""

    intensity: GaussianMixture
    cardinality_pmf: CardinalityDistribution

    @classmethod
    def poisson(cls, intensity: GaussianMixture, truncation: int) -> "BirthModel":
        """Poisson birth process whose rate equals the intensity mass."""
        return cls(intensity, CardinalityDistribution.poisson(intensity.total_mass, truncation))

    @classmethod
    def none(cls, dimension: int, truncation: int) -> "BirthModel":
        return cls(GaussianMixture.empty(dimension), CardinalityDistribution.point_mass(0, truncation))


def noise_gain(delta_t: float) -> np.ndarray:
    half_square = 0.5 * delta_t**2
    return np.array(
        [
            [half_square, 0.0],
            [delta_t, 0.0],
            [0.0, half_square],
            [0.0, delta_t],
        ]
    )


def cv_transition(delta_t: float) -> np.ndarray:
    F = np.eye(STATE_DIM)
    F[0, 1] = delta_t
    F[2, 3] = delta_t
    return F


def build_cv_motion(params: CVModelParams, p_S: float) -> MotionModel:
    """Discretized constant-velocity model: Q = G diag(σ_x², σ_y²) Gᵀ."""
    G = noise_gain(params.delta_t)
    Q = G @ np.diag([params.sigma_x**2, params.sigma_y**2]) @ G.T
    return MotionModel(cv_transition(params.delta_t), Q, p_S)


def build_position_measurement(params: CVModelParams, p_D: float) -> MeasurementModel:
    H = np.zeros((MEASUREMENT_DIM, STATE_DIM))
    H[0, 0] = 1.0
    H[1, 2] = 1.0
    return MeasurementModel(H, params.sigma_o**2 * np.eye(MEASUREMENT_DIM), p_D)


def build_corner_birth_model(
    truncation: int,
    weight: float = CORNER_BIRTH_WEIGHT,
    covariance_scale: float = CORNER_BIRTH_COVARIANCE_SCALE,
) -> BirthModel:
    """Four-quadrant Poisson birth intensity, cardinality truncated at `truncation`."""
    if truncation < 1:
        raise ConfigError("Birth truncation must be at least 1")
    means = np.array(CORNER_BIRTH_MEANS)
    count = means.shape[0]
    intensity = GaussianMixture(
        np.full(count, weight),
        means,
        np.repeat(covariance_scale * np.eye(STATE_DIM)[None], count, axis=0),
    )
    return BirthModel.poisson(intensity, truncation)
