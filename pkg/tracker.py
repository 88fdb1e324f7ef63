"""
Frame-by-frame CPHD tracking: predict -> update -> extract, then track linking
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

import cphd
from cphd import Extraction, FilterState
from dynamics import BirthModel, MeasurementModel, MotionModel
from exceptions import DataError
from gaussian_mixture import GaussianMixture
from linking import Track, link_tracks, track_points
from models import CardinalityRecord, FilterConfig, TrackingStats, TrackPoint
from simulator import DetectionFrame
from utils.logger import TrackLogger


def check_frames(frames: Sequence[DetectionFrame]) -> None:
    """Frames must be sorted with consecutive, non-negative time indices; raises DataError naming the offenders."""
    if frames and frames[0].time_index < 0:
        raise DataError(f"Detection frames start at negative time index {frames[0].time_index}")
    offending = [
        frame.time_index
        for previous, frame in zip(frames, frames[1:])
        if frame.time_index != previous.time_index + 1
    ]
    if offending:
        shown = ", ".join(str(t) for t in offending[:10])
        more = f" (+{len(offending) - 10} more)" if len(offending) > 10 else ""
        raise DataError(f"Detection frames are unsorted or have gaps at time index {shown}{more}")


@dataclass
class TrackingResult:
    extractions: List[Extraction]
    cardinality: List[CardinalityRecord]
    tracks: List[Track]
    stats: TrackingStats
    final_state: Optional[FilterState] = field(default=None, repr=False)

    @property
    def track_points(self) -> List[TrackPoint]:
        return track_points(self.tracks)

    @property
    def map_series(self) -> np.ndarray:
        return np.array([record.map_cardinality for record in self.cardinality])


class CphdTracker:
    """Runs the clutter-free GM-CPHD filter over a gapless sequence of detection frames"""

    def __init__(
        self,
        motion: MotionModel,
        measurement: MeasurementModel,
        birth: BirthModel,
        filter_config: FilterConfig,
        link_gate: float,
        track_logger: Optional[TrackLogger] = None,
        prior: Optional[GaussianMixture] = None,
    ):
        self.motion = motion
        self.measurement = measurement
        self.birth = birth
        self.filter_config = filter_config
        self.link_gate = link_gate
        self.prior = prior
        self.track_logger = track_logger or TrackLogger(logging.getLogger(__name__))

    def step(self, state: FilterState, frame: DetectionFrame) -> Tuple[FilterState, Extraction]:
        """One predict/update/extract cycle."""
        predicted = cphd.predict(state, self.motion, self.birth)
        updated = cphd.update(predicted, frame.measurements, self.measurement, self.filter_config)
        return updated, cphd.extract(updated)

    def run(self, frames: Sequence[DetectionFrame]) -> TrackingResult:
        frames = list(frames)
        check_frames(frames)

        track_logger = self.track_logger
        track_logger.start_run(len(frames))
        start = frames[0].time_index - 1 if frames else -1
        state = cphd.init(self.filter_config, self.prior, time_index=start)

        extractions, records = [], []
        for frame in frames:
            state, extraction = self.step(state, frame)
            mass = state.intensity.total_mass
            track_logger.log_step(
                frame.time_index, len(frame), len(state.intensity), mass, state.expected_cardinality
            )
            if extraction.shortfall:
                track_logger.log_shortfall(frame.time_index, extraction.map_cardinality, len(state.intensity))

            extractions.append(extraction)
            records.append(
                CardinalityRecord(
                    time_index=frame.time_index,
                    map_cardinality=extraction.map_cardinality,
                    expected_cardinality=state.expected_cardinality,
                    intensity_mass=mass,
                    components=len(state.intensity),
                )
            )

        tracks = link_tracks(extractions, self.link_gate)
        track_logger.log_run_summary()
        return TrackingResult(extractions, records, tracks, track_logger.get_stats(), state)
