#!/usr/bin/env python3
"""
CPHD Organelle Tracker

Simulates organelle scenes, tracks detection files with the clutter-free
GM-CPHD filter, scores the tracks with OSPA and tests the distribution of
the estimated accelerations.
"""

import logging
import math
import time
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import numpy as np
from tqdm import tqdm

from analysis import analyze_accelerations
from config import RunConfig
from exceptions import DataError
from models import TrackPoint
from ospa import ospa_over_time, ospa_series
from simulator import generate
from tracker import CphdTracker
from utils.data_storage import DataStorage
from utils.logger import TrackLogger, setup_logger

# MAP count must match the new truth within this many steps of a birth or death
EVENT_LAG_LIMIT = 3
OSPA_TARGET = 10.0


def _json_float(value: float):
    return value if math.isfinite(value) else str(value)


def _positions_by_time(points: List[TrackPoint], times) -> Dict[int, np.ndarray]:
    grouped = {t: [] for t in times}
    for point in points:
        grouped[point.time_index].append((point.p_x, point.p_y))
    return {t: np.array(rows).reshape(-1, 2) for t, rows in grouped.items()}


def event_lags(truth_cardinality: np.ndarray, map_series: np.ndarray) -> List[Optional[int]]:
    """
    Steps until the MAP count matches the truth after each change of the true count.

    None marks an event that was not matched within EVENT_LAG_LIMIT steps.
    """
    lags = []
    for t in np.flatnonzero(np.diff(truth_cardinality)) + 1:
        window = range(t, min(t + EVENT_LAG_LIMIT + 1, truth_cardinality.size))
        lag = next((k - t for k in window if map_series[k] == truth_cardinality[k]), None)
        lags.append(lag)
    return lags


def empty_interval_correct(truth_cardinality: np.ndarray, map_series: np.ndarray) -> Optional[bool]:
    """
    True when the MAP count is 0 on every interior step of every empty interval.

    Interior excludes the first and last step of each run of zero truth
    cardinality. None when the truth has no run of at least three empty steps.
    """
    empty = truth_cardinality == 0
    interiors = []
    t = 0
    while t < empty.size:
        if not empty[t]:
            t += 1
            continue
        end = t
        while end + 1 < empty.size and empty[end + 1]:
            end += 1
        if end - t >= 2:
            interiors.append(range(t + 1, end))
        t = end + 1
    if not interiors:
        return None
    return all(map_series[k] == 0 for interior in interiors for k in interior)


class TrackingPipeline:
    """Runs simulate, track, evaluate, analyze and Monte Carlo jobs for one RunConfig"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.logger = setup_logger("cphd_tracker", config.log_level, config.log_file)
        self.storage = DataStorage(config.output_directory)

    def _path(self, path: Optional[str], default: str) -> Path:
        return Path(path) if path else self.storage.output_dir / default

    def build_tracker(self, track_logger: Optional[TrackLogger] = None) -> CphdTracker:
        config = self.config
        return CphdTracker(
            motion=config.motion_model(),
            measurement=config.measurement_model(),
            birth=config.birth_model(),
            filter_config=config.filter_config(),
            link_gate=config.linking_gate(),
            track_logger=track_logger or TrackLogger(self.logger),
        )

    def simulate(self) -> Dict[str, Any]:
        """Generate the configured scenario and write truth.csv and detections.csv."""
        spec = self.config.scenario_spec()
        truth, frames = generate(spec)
        self.storage.save_truth(truth)
        self.storage.save_detections(frames)

        summary = {
            "scenario": self.config.scenario,
            "seed": spec.seed,
            "tracks": len(spec.birth_events),
            "steps": spec.duration,
            "detections": int(sum(len(frame) for frame in frames)),
            "empty_frames": int(sum(len(frame) == 0 for frame in frames)),
            "max_cardinality": int(truth.cardinality.max()) if truth.duration else 0,
        }
        self.storage.save_summary("simulation", summary)
        self.logger.info(
            f"Simulated {summary['tracks']} tracks over {summary['steps']} steps "
            f"({summary['detections']} detections)"
        )
        return summary

    def track(self, detections_path: Optional[str] = None) -> Dict[str, Any]:
        """Run the filter over a detections file and write tracks.csv and cardinality.csv."""
        frames = self.storage.load_detections(self._path(detections_path, "detections.csv"))
        if not frames:
            raise DataError("Detections file contains no frames")

        started = time.perf_counter()
        result = self.build_tracker().run(frames)
        elapsed = time.perf_counter() - started

        self.storage.save_tracks(result.track_points)
        self.storage.save_cardinality(result.cardinality)
        stats = result.stats
        summary = {
            "frames": len(frames),
            "tracks": len(result.tracks),
            "seconds": round(elapsed, 3),
            **stats.model_dump(),
            "consistency_rate": stats.consistency_rate,
        }
        self.storage.save_summary("tracking", summary)
        return summary

    def evaluate(self, truth_path: Optional[str] = None, tracks_path: Optional[str] = None) -> Dict[str, Any]:
        """Per-step OSPA between truth.csv and tracks.csv, written to ospa.csv."""
        truth = self.storage.load_truth(self._path(truth_path, "truth.csv"))
        tracks = self.storage.load_tracks(self._path(tracks_path, "tracks.csv"))
        if not truth:
            raise DataError("Truth file contains no rows")

        truth_times = [p.time_index for p in truth]
        # an empty tracks file is scored over the truth range
        track_times = [p.time_index for p in tracks] or truth_times
        if max(track_times) < min(truth_times) or max(truth_times) < min(track_times):
            raise DataError(
                f"Time ranges do not overlap: truth {min(truth_times)}..{max(truth_times)}, "
                f"tracks {min(track_times)}..{max(track_times)}"
            )

        times = range(min(truth_times + track_times), max(truth_times + track_times) + 1)
        params = self.config.ospa_params()
        series = ospa_over_time(_positions_by_time(truth, times), _positions_by_time(tracks, times), params)
        self.storage.save_ospa(series)

        summary = {
            "cutoff_c": params.cutoff_c,
            "order_l": _json_float(params.order_l),
            "steps": len(series.time_indices),
            **series.summary(),
        }
        self.storage.save_summary("evaluation", summary)
        return summary

    def analyze(self, tracks_path: Optional[str] = None) -> Dict[str, Any]:
        """Acceleration normality report for a tracks (or truth) file."""
        points = self.storage.load_tracks(self._path(tracks_path, "tracks.csv"))
        report = analyze_accelerations(points, self.config.delta_t, self.config.significance_level)
        self.storage.save_accelerations(report.accelerations)
        self.storage.save_quantiles(report.quantiles)

        summary = {
            "samples": report.samples,
            "significance_level": self.config.significance_level,
            "excluded_tracks": report.excluded_tracks,
            "axes": [axis.model_dump() for axis in report.axes],
            "report": report.format_report(),
        }
        self.storage.save_summary("analysis", summary)
        return summary

    def run_once(self, seed: int, track_logger: Optional[TrackLogger] = None) -> Dict[str, Any]:
        """Simulate, track and score one seeded scenario in memory."""
        config = self.config.override(seed=seed)
        truth, frames = generate(config.scenario_spec())
        pipeline_tracker = self.build_tracker(track_logger)
        result = pipeline_tracker.run(frames)
        series = ospa_series(truth, result.extractions, config.ospa_params())

        truth_cardinality = truth.cardinality
        map_series = result.map_series
        lags = event_lags(truth_cardinality, map_series)
        return {
            "seed": seed,
            "mean_ospa": float(series.column("total").mean()),
            "cardinality_hit_rate": float(np.mean(map_series == truth_cardinality)),
            "events": len(lags),
            "events_within_limit": sum(lag is not None for lag in lags),
            "empty_interval_correct": empty_interval_correct(truth_cardinality, map_series),
            "consistency_rate": result.stats.consistency_rate,
        }

    def monte_carlo(self, runs: int, first_seed: Optional[int] = None) -> Dict[str, Any]:
        """Seeded simulate -> track -> evaluate repetitions, summarised to monte_carlo_summary.json."""
        if runs < 1:
            raise ValueError("runs must be at least 1")
        first_seed = self.config.seed if first_seed is None else first_seed

        quiet = logging.getLogger("cphd_tracker.monte_carlo")
        quiet.setLevel(logging.WARNING)
        track_logger = TrackLogger(quiet)

        per_run = [
            self.run_once(first_seed + k, track_logger)
            for k in tqdm(range(runs), desc="Monte Carlo", unit="run")
        ]
        summary = summarize_runs(per_run)
        summary["scenario"] = self.config.scenario
        summary["runs"] = per_run
        self.storage.save_summary("monte_carlo", summary)
        self.logger.info(
            f"Monte Carlo over {runs} runs: OSPA < {OSPA_TARGET:g} in "
            f"{summary['ospa_below_target_rate'] * 100:.0f}% of runs, "
            f"cardinality hit rate {summary['mean_cardinality_hit_rate']:.3f}"
        )
        return summary


def summarize_runs(per_run: List[Mapping[str, Any]]) -> Dict[str, Any]:
    """Aggregate rates over Monte Carlo runs."""
    events = sum(run["events"] for run in per_run)
    matched = sum(run["events_within_limit"] for run in per_run)
    empty_checks = [run["empty_interval_correct"] for run in per_run if run["empty_interval_correct"] is not None]
    return {
        "run_count": len(per_run),
        "ospa_below_target_rate": float(np.mean([run["mean_ospa"] < OSPA_TARGET for run in per_run])),
        "mean_ospa": float(np.mean([run["mean_ospa"] for run in per_run])),
        "mean_cardinality_hit_rate": float(np.mean([run["cardinality_hit_rate"] for run in per_run])),
        "event_match_rate": matched / events if events else 1.0,
        "empty_interval_rate": float(np.mean(empty_checks)) if empty_checks else None,
        "mean_consistency_rate": float(np.mean([run["consistency_rate"] for run in per_run])),
    }


if __name__ == "__main__":
    import sys

    from cli import main

    sys.exit(main())
