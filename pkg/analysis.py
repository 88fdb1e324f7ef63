"""
Acceleration statistics of tracked objects and their Kolmogorov-Smirnov normality test
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from models import AxisNormality, TrackPoint

logger = logging.getLogger(__name__)

ZERO_VARIANCE_NOTE = "zero-variance sample, test skipped"
ESTIMATED_PARAMETERS_NOTE = (
    "mean and sd estimated from the sample; p-value from the asymptotic Kolmogorov "
    "distribution without Lilliefors correction"
)
ACCELERATION_COLUMNS = ["track_id", "time_index", "a_x_um_s2", "a_y_um_s2"]


@dataclass
class AccelerationReport:
    accelerations: pd.DataFrame
    axes: List[AxisNormality]
    quantiles: pd.DataFrame
    excluded_tracks: List[int] = field(default_factory=list)

    @property
    def samples(self) -> int:
        return len(self.accelerations)

    def axis(self, name: str) -> AxisNormality:
        return next(result for result in self.axes if result.axis == name)

    def format_report(self) -> str:
        """Human-readable report: pooled sample count, then one line per axis."""
        lines = [f"m={self.samples}"]
        for result in self.axes:
            line = f"µ_{result.axis}^a={result.mean:.4f}, σ_{result.axis}^a={result.sd:.4f}"
            if result.decision == "skipped":
                line += f"  [{result.note}]"
            else:
                line += f"  KS={result.ks_statistic:.4f}  p={result.p_value:.4f}  H0 {result.decision}ed"
            lines.append(line)
        return "\n".join(lines)


def points_frame(points: Sequence[TrackPoint]) -> pd.DataFrame:
    columns = ["track_id", "time_index", "p_x", "v_x", "p_y", "v_y", "weight"]
    return pd.DataFrame([point.model_dump() for point in points], columns=columns)


def compute_accelerations(points: Sequence[TrackPoint], delta_t: float = 1.0):
    """
    Second differences of position, a_t = (p_{t+1} − 2 p_t + p_{t−1}) / Δ².

    Only triples of consecutive time indices contribute. Returns the
    accelerations frame and the ids of tracks that yielded no sample.
    """
    frame = points_frame(points).sort_values(["track_id", "time_index"])
    pieces, excluded = [], []

    for track_id, track in frame.groupby("track_id", sort=True):
        t = track["time_index"].to_numpy()
        position = track[["p_x", "p_y"]].to_numpy()
        consecutive = (t[1:-1] - t[:-2] == 1) & (t[2:] - t[1:-1] == 1) if len(t) >= 3 else np.zeros(0, bool)
        if not consecutive.any():
            logger.warning(f"Track {track_id}: fewer than 3 consecutive points, excluded from pooling")
            excluded.append(int(track_id))
            continue

        second = (position[2:] - 2.0 * position[1:-1] + position[:-2]) / delta_t**2
        pieces.append(
            pd.DataFrame(
                {
                    "track_id": int(track_id),
                    "time_index": t[1:-1][consecutive],
                    "a_x_um_s2": second[consecutive, 0],
                    "a_y_um_s2": second[consecutive, 1],
                }
            )
        )

    if not pieces:
        return pd.DataFrame(columns=ACCELERATION_COLUMNS), excluded
    return pd.concat(pieces, ignore_index=True)[ACCELERATION_COLUMNS], excluded


def normality_test(samples, axis: str, significance_level: float = 0.05) -> AxisNormality:
    """One-sample KS test of the samples against N(sample mean, sample sd)."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        mean = float(x.mean()) if x.size else 0.0
        return AxisNormality(
            axis=axis, samples=x.size, mean=mean, sd=0.0, decision="skipped", note="too few samples, test skipped"
        )

    mean, sd = float(x.mean()), float(x.std(ddof=1))
    if math.isclose(sd, 0.0, abs_tol=1e-12):
        return AxisNormality(axis=axis, samples=x.size, mean=mean, sd=sd, decision="skipped", note=ZERO_VARIANCE_NOTE)

    result = stats.kstest(x, "norm", args=(mean, sd), method="asymp")
    return AxisNormality(
        axis=axis,
        samples=x.size,
        mean=mean,
        sd=sd,
        ks_statistic=float(result.statistic),
        p_value=float(result.pvalue),
        decision="accept" if result.pvalue >= significance_level else "reject",
        note=ESTIMATED_PARAMETERS_NOTE,
    )


def normal_quantiles(samples, axis: str) -> pd.DataFrame:
    """Normal probability-plot data: theoretical quantiles against ordered samples."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        return pd.DataFrame(columns=["axis", "theoretical_quantile", "ordered_value"])
    (theoretical, ordered), _ = stats.probplot(x, dist="norm")
    return pd.DataFrame({"axis": axis, "theoretical_quantile": theoretical, "ordered_value": ordered})


def analyze_accelerations(
    points: Sequence[TrackPoint], delta_t: float = 1.0, significance_level: float = 0.05
) -> AccelerationReport:
    accelerations, excluded = compute_accelerations(points, delta_t)
    axes, quantiles = [], []
    for axis, column in (("x", "a_x_um_s2"), ("y", "a_y_um_s2")):
        samples = accelerations[column].to_numpy(dtype=float)
        axes.append(normality_test(samples, axis, significance_level))
        quantiles.append(normal_quantiles(samples, axis))

    report = AccelerationReport(accelerations, axes, pd.concat(quantiles, ignore_index=True), excluded)
    logger.info(f"Acceleration analysis over {report.samples} samples")
    return report
