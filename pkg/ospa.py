"""
OSPA distance between finite point sets, with its localization/cardinality split

Finite orders are solved by linear assignment on the cutoff distance matrix padded
to a square with cost c^ℓ. Order ∞ is a bottleneck assignment: the smallest
distance threshold whose graph still has a matching that covers the smaller set.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.spatial.distance import cdist

from cphd import Extraction
from dynamics import POSITION_INDICES
from exceptions import DataError
from models import OspaParams, OspaResult
from simulator import GroundTruth


def _as_points(points) -> np.ndarray:
    array = np.asarray(points, dtype=float)
    if array.size == 0:
        return array.reshape(0, array.shape[-1] if array.ndim == 2 else 0)
    if array.ndim == 1:
        array = array.reshape(1, -1)
    if array.ndim != 2:
        raise DataError(f"Point sets must be 2-D arrays, got shape {array.shape}")
    return array


def _bottleneck(distances: np.ndarray) -> float:
    """min over injections of the smaller side of the largest matched distance."""
    rows, cols = distances.shape
    thresholds = np.unique(distances)
    lo, hi = 0, thresholds.size - 1
    while lo < hi:
        mid = (lo + hi) // 2
        graph = csr_matrix((distances <= thresholds[mid]).astype(np.int8))
        matched = maximum_bipartite_matching(graph, perm_type="column")
        if np.count_nonzero(matched >= 0) == rows:
            hi = mid
        else:
            lo = mid + 1
    return float(thresholds[lo])


def ospa(X, Y, params: OspaParams) -> OspaResult:
    """
    OSPA distance of order ℓ with cutoff c between two finite sets of vectors.

    Either set may be empty. For ℓ = 1 the total equals localization plus
    cardinality error.
    """
    X, Y = _as_points(X), _as_points(Y)
    if len(X) > len(Y):
        X, Y = Y, X
    m, n = len(X), len(Y)
    c = params.cutoff_c

    if n == 0:
        return OspaResult(total=0.0, localization=0.0, cardinality_err=0.0)
    if m and X.shape[1] != Y.shape[1]:
        raise DataError(f"Point dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if m == 0:
        return OspaResult(total=c, localization=0.0, cardinality_err=c)

    distances = np.minimum(cdist(X, Y), c)

    if params.is_infinite_order:
        localization = _bottleneck(distances)
        if m == n:
            return OspaResult(total=localization, localization=localization, cardinality_err=0.0)
        return OspaResult(total=c, localization=localization, cardinality_err=c)

    order = params.order_l
    cost = np.full((n, n), c**order)
    cost[:m] = distances**order
    rows, cols = linear_sum_assignment(cost)
    assigned = rows < m
    localization_sum = math.fsum(cost[rows[assigned], cols[assigned]])
    cardinality_sum = c**order * (n - m)

    total = ((localization_sum + cardinality_sum) / n) ** (1.0 / order)
    return OspaResult(
        total=min(total, c),
        localization=(localization_sum / n) ** (1.0 / order),
        cardinality_err=(cardinality_sum / n) ** (1.0 / order),
    )


@dataclass(frozen=True)
class OspaSeries:
    time_indices: List[int]
    results: List[OspaResult]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(result, name) for result in self.results])

    def summary(self) -> Dict[str, float]:
        """Mean and max of every OSPA component over time."""
        summary = {}
        for name in ("total", "localization", "cardinality_err"):
            values = self.column(name)
            summary[f"mean_{name}"] = float(values.mean()) if values.size else 0.0
            summary[f"max_{name}"] = float(values.max()) if values.size else 0.0
        return summary


def ospa_over_time(
    truth: Mapping[int, np.ndarray],
    estimates: Mapping[int, np.ndarray],
    params: OspaParams,
) -> OspaSeries:
    """OSPA for every time index present in either mapping (missing frames count as empty)."""
    times = sorted(set(truth) | set(estimates))
    results = [ospa(truth.get(t, ()), estimates.get(t, ()), params) for t in times]
    return OspaSeries(times, results)


def ospa_series(truth: GroundTruth, extractions: Sequence[Extraction], params: OspaParams) -> OspaSeries:
    """Positional OSPA of filter extractions against the ground truth, step by step."""
    truth_frames = {t: truth.positions(t) for t in range(truth.duration)}
    estimate_frames = {}
    for extraction in extractions:
        if extraction.time_index not in truth_frames:
            raise DataError(f"Extraction at time {extraction.time_index} lies outside the ground truth")
        states = extraction.states
        estimate_frames[extraction.time_index] = (
            np.stack(states)[:, list(POSITION_INDICES)] if states else np.zeros((0, len(POSITION_INDICES)))
        )
    return ospa_over_time(truth_frames, estimate_frames, params)
