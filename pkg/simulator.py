"""
Synthetic organelle scenes: scheduled births and deaths, constant-velocity motion,
Bernoulli detection and Gaussian position noise.

Randomness comes from one numpy SeedSequence per scenario, split into one
substream per track, one for the detection coin flips and one for measurement
noise (which also shuffles each frame), so the content of a track does not
depend on how many other tracks exist.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from dynamics import MEASUREMENT_DIM, CORNER_BIRTH_MEANS, POSITION_INDICES, STATE_DIM, cv_transition, noise_gain
from exceptions import ConfigError
from models import CVModelParams, TrackPoint

logger = logging.getLogger(__name__)

ACCEL_NOISE_KINDS = ("gaussian", "uniform")
MAX_ORGANELLE_SPEED = 7.0
DEFAULT_TRUTH_ACCEL_SD = 0.25

# extra entropy word keeping schedule draws apart from the dynamics streams
_SCHEDULE_KEY = 0x5C4ED


@dataclass(frozen=True, eq=False)
class BirthEvent:
    """Object alive on steps birth_step <= t < death_step"""

    birth_step: int
    initial_state: np.ndarray
    death_step: int

    def __post_init__(self):
        state = np.array(self.initial_state, dtype=float).reshape(-1)
        if state.size != STATE_DIM:
            raise ConfigError(f"Initial state must have {STATE_DIM} entries, got {state.size}")
        state.flags.writeable = False
        object.__setattr__(self, "initial_state", state)

    def alive(self, t: int) -> bool:
        return self.birth_step <= t < self.death_step


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    duration: int
    birth_events: Tuple[BirthEvent, ...]
    motion: CVModelParams
    p_D: float
    seed: int
    accel_noise: str = "gaussian"
    max_speed: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "birth_events", tuple(self.birth_events))
        if self.duration < 1:
            raise ConfigError("Scenario duration must be at least one step")
        for k, event in enumerate(self.birth_events):
            if not 0 <= event.birth_step < event.death_step <= self.duration:
                raise ConfigError(
                    f"Track {k}: need 0 <= birth ({event.birth_step}) < death "
                    f"({event.death_step}) <= duration ({self.duration})"
                )
        if not 0.0 <= self.p_D <= 1.0:
            raise ConfigError(f"p_D must lie in [0, 1], got {self.p_D}")
        if self.accel_noise not in ACCEL_NOISE_KINDS:
            raise ConfigError(f"accel_noise must be one of {ACCEL_NOISE_KINDS}, got {self.accel_noise!r}")
        if self.max_speed is not None and self.max_speed <= 0:
            raise ConfigError("max_speed must be positive")

    def alive_count(self, t: int) -> int:
        return sum(event.alive(t) for event in self.birth_events)

    def scheduled_cardinality(self) -> np.ndarray:
        return np.array([self.alive_count(t) for t in range(self.duration)])


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Per-step (track id, state) pairs"""

    frames: Tuple[Tuple[Tuple[int, np.ndarray], ...], ...]

    @property
    def duration(self) -> int:
        return len(self.frames)

    @property
    def cardinality(self) -> np.ndarray:
        return np.array([len(frame) for frame in self.frames])

    @property
    def track_ids(self) -> List[int]:
        return sorted({track_id for frame in self.frames for track_id, _ in frame})

    def positions(self, t: int) -> np.ndarray:
        frame = self.frames[t]
        if not frame:
            return np.zeros((0, MEASUREMENT_DIM))
        return np.stack([state[list(POSITION_INDICES)] for _, state in frame])

    def records(self) -> List[TrackPoint]:
        """Rows sorted by (track_id, time_index)."""
        rows = [
            TrackPoint(
                track_id=track_id,
                time_index=t,
                p_x=float(state[0]),
                v_x=float(state[1]),
                p_y=float(state[2]),
                v_y=float(state[3]),
            )
            for t, frame in enumerate(self.frames)
            for track_id, state in frame
        ]
        return sorted(rows, key=lambda row: (row.track_id, row.time_index))

    @classmethod
    def from_records(cls, records: Sequence[TrackPoint], duration: Optional[int] = None) -> "GroundTruth":
        if duration is None:
            duration = max((r.time_index for r in records), default=-1) + 1
        frames = [[] for _ in range(duration)]
        for r in sorted(records, key=lambda row: (row.time_index, row.track_id)):
            frames[r.time_index].append((r.track_id, np.array([r.p_x, r.v_x, r.p_y, r.v_y])))
        return cls(tuple(tuple(frame) for frame in frames))


@dataclass(frozen=True, eq=False)
class DetectionFrame:
    """Unordered measurement set of one time step, shape (m, 2)"""

    time_index: int
    measurements: np.ndarray

    def __post_init__(self):
        Z = np.array(self.measurements, dtype=float)
        Z = Z.reshape(-1, MEASUREMENT_DIM) if Z.size else np.zeros((0, MEASUREMENT_DIM))
        Z.flags.writeable = False
        object.__setattr__(self, "measurements", Z)

    def __len__(self) -> int:
        return self.measurements.shape[0]


def _acceleration_noise(rng: np.random.Generator, kind: str, sd: np.ndarray, size: int) -> np.ndarray:
    if kind == "uniform":
        half_width = math.sqrt(3.0) * sd
        return rng.uniform(-half_width, half_width, size=(size, 2))
    return rng.normal(0.0, sd, size=(size, 2))


def _cap_speed(state: np.ndarray, max_speed: Optional[float]) -> np.ndarray:
    if max_speed is None:
        return state
    speed = math.hypot(state[1], state[3])
    if speed > max_speed:
        state = state.copy()
        state[[1, 3]] *= max_speed / speed
    return state


def _simulate_track(
    event: BirthEvent, spec: ScenarioSpec, rng: np.random.Generator
) -> List[np.ndarray]:
    dt = spec.motion.delta_t
    F = cv_transition(dt)
    G = noise_gain(dt)
    sd = np.array([spec.motion.sigma_x, spec.motion.sigma_y])

    steps = event.death_step - event.birth_step
    accelerations = _acceleration_noise(rng, spec.accel_noise, sd, steps - 1)
    states = [_cap_speed(event.initial_state.copy(), spec.max_speed)]
    for a in accelerations:
        states.append(_cap_speed(F @ states[-1] + G @ a, spec.max_speed))
    return states


def generate(spec: ScenarioSpec) -> Tuple[GroundTruth, List[DetectionFrame]]:
    """Simulate ground truth and clutter-free detections; identical seeds give identical output."""
    n_tracks = len(spec.birth_events)
    streams = np.random.SeedSequence(spec.seed).spawn(n_tracks + 2)
    detection_rng = np.random.default_rng(streams[n_tracks])
    noise_rng = np.random.default_rng(streams[n_tracks + 1])

    frames = [[] for _ in range(spec.duration)]
    for track_id, event in enumerate(spec.birth_events):
        states = _simulate_track(event, spec, np.random.default_rng(streams[track_id]))
        for offset, state in enumerate(states):
            state.flags.writeable = False
            frames[event.birth_step + offset].append((track_id, state))

    truth = GroundTruth(tuple(tuple(frame) for frame in frames))
    sigma_o = spec.motion.sigma_o
    detections = []
    for t, frame in enumerate(truth.frames):
        detected = detection_rng.random(len(frame)) < spec.p_D
        positions = truth.positions(t)[detected]
        Z = positions + noise_rng.normal(0.0, sigma_o, size=positions.shape)
        detections.append(DetectionFrame(t, Z[noise_rng.permutation(Z.shape[0])]))

    total = sum(len(frame) for frame in detections)
    logger.debug("Generated %d tracks over %d steps, %d detections", n_tracks, spec.duration, total)
    return truth, detections


def _truth_motion(sigma_o: float, accel_sd: float, delta_t: float) -> CVModelParams:
    return CVModelParams(delta_t=delta_t, sigma_x=accel_sd, sigma_y=accel_sd, sigma_o=sigma_o)


def _random_velocity(rng: np.random.Generator, low: float, high: float) -> np.ndarray:
    angle = rng.uniform(0.0, 2.0 * math.pi)
    speed = rng.uniform(low, high)
    return speed * np.array([math.cos(angle), math.sin(angle)])


def _near(mean: Sequence[float], rng: np.random.Generator, velocity: np.ndarray) -> np.ndarray:
    position = np.array([mean[0], mean[2]]) + rng.uniform(-1.5, 1.5, size=2)
    return np.array([position[0], velocity[0], position[1], velocity[1]])


def standard_scenario(
    seed: int,
    p_D: float = 0.98,
    sigma_o: float = 0.2,
    accel_sd: float = DEFAULT_TRUTH_ACCEL_SD,
    delta_t: float = 1.0,
    accel_noise: str = "gaussian",
    max_speed: Optional[float] = MAX_ORGANELLE_SPEED,
) -> ScenarioSpec:
    """
    Twelve tracks over 100 steps with the population changing mostly early and late.

    Tracks 0-1 are present from step 0 and leave between steps 15 and 29; the
    others enter before step 30. Tracks 2-7 leave between steps 80 and 99 and
    tracks 8-11 stay to the end. Tracks 8/9 and 10/11 are aimed at each other
    along y so each pair meets at a common point on its nominal path.
    """
    duration = 100
    rng = np.random.default_rng([seed, _SCHEDULE_KEY])
    events = []

    for k in range(2):
        velocity = _random_velocity(rng, 0.5, 3.0)
        death = int(rng.integers(15, 30))
        events.append(BirthEvent(0, _near(CORNER_BIRTH_MEANS[k % 4], rng, velocity), death))

    for k in range(2, 8):
        birth = int(rng.integers(0, 30))
        velocity = _random_velocity(rng, 0.5, 3.0)
        death = int(rng.integers(80, 100))
        events.append(BirthEvent(birth, _near(CORNER_BIRTH_MEANS[k % 4], rng, velocity), death))

    # (upper quadrant, lower quadrant) of each crossing pair
    for upper, lower in ((0, 1), (3, 2)):
        birth_a = int(rng.integers(0, 25))
        birth_b = birth_a + int(rng.integers(0, 3))
        velocity_a = np.array([rng.uniform(-0.5, 0.5), -rng.uniform(1.0, 2.0)])
        state_a = _near(CORNER_BIRTH_MEANS[upper], rng, velocity_a)

        crossing = birth_b + int(rng.integers(8, 14))
        meeting = state_a[[0, 2]] + velocity_a * (crossing - birth_a)
        start_b = _near(CORNER_BIRTH_MEANS[lower], rng, np.zeros(2))[[0, 2]]
        velocity_b = (meeting - start_b) / (crossing - birth_b)
        state_b = np.array([start_b[0], velocity_b[0], start_b[1], velocity_b[1]])

        events.append(BirthEvent(birth_a, state_a, duration))
        events.append(BirthEvent(birth_b, state_b, duration))

    return ScenarioSpec(
        duration=duration,
        birth_events=tuple(events),
        motion=_truth_motion(sigma_o, accel_sd, delta_t),
        p_D=p_D,
        seed=seed,
        accel_noise=accel_noise,
        max_speed=max_speed,
    )


EMPTY_INTERVAL = (26, 30)


def empty_interval_scenario(
    seed: int,
    p_D: float = 0.98,
    sigma_o: float = 0.2,
    accel_sd: float = DEFAULT_TRUTH_ACCEL_SD,
    delta_t: float = 1.0,
    accel_noise: str = "gaussian",
    max_speed: Optional[float] = MAX_ORGANELLE_SPEED,
) -> ScenarioSpec:
    """
    60 steps with no object on steps 26-29.

    Three tracks leave at step 26 and three new ones arrive at step 30.
    """
    duration = 60
    first, last = EMPTY_INTERVAL
    rng = np.random.default_rng([seed, _SCHEDULE_KEY])
    events = []
    for k in range(3):
        velocity = _random_velocity(rng, 0.3, 1.5)
        events.append(BirthEvent(int(rng.integers(0, 5)), _near(CORNER_BIRTH_MEANS[k], rng, velocity), first))
    for k in range(3):
        velocity = _random_velocity(rng, 0.3, 1.5)
        events.append(BirthEvent(last, _near(CORNER_BIRTH_MEANS[(k + 1) % 4], rng, velocity), duration))

    return ScenarioSpec(
        duration=duration,
        birth_events=tuple(events),
        motion=_truth_motion(sigma_o, accel_sd, delta_t),
        p_D=p_D,
        seed=seed,
        accel_noise=accel_noise,
        max_speed=max_speed,
    )


def steady_scenario(
    n_tracks: int,
    duration: int,
    seed: int,
    p_D: float = 0.98,
    sigma_o: float = 0.2,
    accel_sd: float = DEFAULT_TRUTH_ACCEL_SD,
    delta_t: float = 1.0,
    accel_noise: str = "gaussian",
    max_speed: Optional[float] = MAX_ORGANELLE_SPEED,
    spacing: float = 8.0,
) -> ScenarioSpec:
    """Fixed population present for the whole run, started on a square grid."""
    if n_tracks < 1:
        raise ConfigError("steady scenario needs at least one track")
    rng = np.random.default_rng([seed, _SCHEDULE_KEY])
    side = math.ceil(math.sqrt(n_tracks))
    offset = 0.5 * spacing * (side - 1)
    events = []
    for k in range(n_tracks):
        row, col = divmod(k, side)
        velocity = _random_velocity(rng, 0.0, 1.0)
        state = np.array([col * spacing - offset, velocity[0], row * spacing - offset, velocity[1]])
        events.append(BirthEvent(0, state, duration))

    return ScenarioSpec(
        duration=duration,
        birth_events=tuple(events),
        motion=_truth_motion(sigma_o, accel_sd, delta_t),
        p_D=p_D,
        seed=seed,
        accel_noise=accel_noise,
        max_speed=max_speed,
    )
