"""
Greedy frame-to-frame linking of extracted states into labeled tracks

The CPHD filter is label-free; labels are attached afterwards by associating the
estimates of consecutive frames in position space.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

import numpy as np
from scipy.spatial.distance import cdist

from cphd import Extraction
from dynamics import POSITION_INDICES
from models import CVModelParams, TrackPoint

logger = logging.getLogger(__name__)

# Largest organelle speed observed in the streaming data (µm/s)
MAX_PLAUSIBLE_SPEED = 7.0


def default_gate(params: CVModelParams, max_speed: float = MAX_PLAUSIBLE_SPEED) -> float:
    """3σ_o plus the largest plausible displacement in one sampling interval."""
    return 3.0 * params.sigma_o + max_speed * params.delta_t


@dataclass
class Track:
    """Consecutive labeled estimates of one object"""

    track_id: int
    points: List[TrackPoint] = field(default_factory=list)

    @property
    def start(self) -> int:
        return self.points[0].time_index

    @property
    def end(self) -> int:
        return self.points[-1].time_index

    @property
    def last_position(self) -> np.ndarray:
        point = self.points[-1]
        return np.array([point.p_x, point.p_y])

    def __len__(self) -> int:
        return len(self.points)


def _point(track_id: int, time_index: int, state: np.ndarray, weight: float) -> TrackPoint:
    return TrackPoint(
        track_id=track_id,
        time_index=time_index,
        p_x=float(state[0]),
        v_x=float(state[1]),
        p_y=float(state[2]),
        v_y=float(state[3]),
        weight=float(weight),
    )


def _greedy_pairs(distances: np.ndarray, gate: float):
    """(row, col) pairs in increasing distance, each row and column used once."""
    rows, cols = np.nonzero(distances <= gate)
    if rows.size == 0:
        return []
    # ties resolved by row then column index
    order = np.lexsort((cols, rows, distances[rows, cols]))
    used_rows, used_cols, pairs = set(), set(), []
    for k in order:
        r, c = int(rows[k]), int(cols[k])
        if r in used_rows or c in used_cols:
            continue
        used_rows.add(r)
        used_cols.add(c)
        pairs.append((r, c))
    return pairs


def link_tracks(extractions: Iterable[Extraction], gate: float) -> List[Track]:
    """
    Label extracted states by greedy nearest-neighbour association.

    Estimates of frame t are matched to tracks that were extended at frame t−1,
    closest pairs first, as long as their position distance is within `gate`.
    Unmatched estimates open new tracks; a track that misses one frame is
    terminated. Tracks are returned ordered by id.
    """
    if gate <= 0:
        raise ValueError("Linking gate must be positive")

    tracks: List[Track] = []
    active: List[Track] = []
    previous_time: Optional[int] = None

    for extraction in extractions:
        t = extraction.time_index
        states = [np.asarray(e.state, dtype=float) for e in extraction]
        weights = [e.weight for e in extraction]

        if previous_time is not None and t != previous_time + 1:
            active = []
        previous_time = t

        assigned = {}
        if active and states:
            distances = cdist(
                np.stack([track.last_position for track in active]),
                np.stack([state[list(POSITION_INDICES)] for state in states]),
            )
            assigned = {col: row for row, col in _greedy_pairs(distances, gate)}

        next_active = []
        for col, state in enumerate(states):
            if col in assigned:
                track = active[assigned[col]]
            else:
                track = Track(track_id=len(tracks))
                tracks.append(track)
            track.points.append(_point(track.track_id, t, state, weights[col]))
            next_active.append(track)

        terminated = len(active) - len(assigned)
        if terminated:
            logger.debug("Frame %d: %d track(s) terminated", t, terminated)
        active = next_active

    logger.debug("Linked %d tracks", len(tracks))
    return tracks


def track_points(tracks: Iterable[Track]) -> List[TrackPoint]:
    """Flatten tracks into rows sorted by (track_id, time_index)."""
    return [point for track in sorted(tracks, key=lambda tr: tr.track_id) for point in track.points]
