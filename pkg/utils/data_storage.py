"""
Data storage utilities for the CPHD tracker
"""

import csv
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Sequence

import numpy as np
import pandas as pd

from exceptions import DataError
from models import CardinalityRecord, TrackPoint
from simulator import DetectionFrame, GroundTruth

TRUTH_COLUMNS = ["track_id", "time_index", "p_x_um", "v_x_um_s", "p_y_um", "v_y_um_s"]
TRACK_COLUMNS = TRUTH_COLUMNS + ["weight"]
DETECTION_COLUMNS = ["time_index", "p_x_um", "p_y_um"]
CARDINALITY_COLUMNS = ["time_index", "map_cardinality", "expected_cardinality", "intensity_mass", "components"]
OSPA_COLUMNS = ["time_index", "total", "localization", "cardinality_err"]
QUANTILE_COLUMNS = ["axis", "theoretical_quantile", "ordered_value"]

# TrackPoint field -> CSV column
_POINT_FIELDS = {
    "track_id": "track_id",
    "time_index": "time_index",
    "p_x": "p_x_um",
    "v_x": "v_x_um_s",
    "p_y": "p_y_um",
    "v_y": "v_y_um_s",
    "weight": "weight",
}


def format_value(value: Any) -> str:
    """Integers verbatim, floats with 9 significant digits, missing values empty."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else f"{float(value):.9g}"
    return str(value)


class DataStorage:
    """
    Reads and writes the tracker's CSV and JSON files in one output directory
    """

    def __init__(self, output_directory: str = "data"):
        self.output_dir = Path(output_directory)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.logger = logging.getLogger(__name__)

    def _atomic_write(self, filename: Path, write: Callable) -> Path:
        """Write through a temporary file in the target directory, then rename it into place."""
        filename = Path(filename)
        filename.parent.mkdir(parents=True, exist_ok=True)
        handle = tempfile.NamedTemporaryFile(
            "w", dir=filename.parent, prefix=f".{filename.name}.", suffix=".tmp",
            delete=False, newline="", encoding="utf-8",
        )
        try:
            with handle:
                write(handle)
            os.replace(handle.name, filename)
        except BaseException:
            Path(handle.name).unlink(missing_ok=True)
            raise
        return filename

    def _write_csv(self, filename: str, fieldnames: List[str], rows: Iterable[Dict[str, Any]]) -> Path:
        """Generic CSV writer; every value goes through format_value"""
        rows = list(rows)

        def write(csvfile):
            writer = csv.DictWriter(csvfile, fieldnames=fieldnames, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({key: format_value(row.get(key)) for key in fieldnames})

        path = self._atomic_write(self.output_dir / filename, write)
        self.logger.info(f"Saved {len(rows)} rows to {path}")
        return path

    def _write_frame(self, filename: str, fieldnames: List[str], frame: pd.DataFrame) -> Path:
        return self._write_csv(filename, fieldnames, frame[fieldnames].to_dict("records"))

    @staticmethod
    def _point_rows(points: Sequence[TrackPoint]) -> List[Dict[str, Any]]:
        return [{_POINT_FIELDS[key]: value for key, value in p.model_dump().items()} for p in points]

    # Writers

    def save_truth(self, truth: GroundTruth, filename: str = "truth.csv") -> Path:
        return self._write_csv(filename, TRUTH_COLUMNS, self._point_rows(truth.records()))

    def save_tracks(self, points: Sequence[TrackPoint], filename: str = "tracks.csv") -> Path:
        return self._write_csv(filename, TRACK_COLUMNS, self._point_rows(points))

    def save_detections(self, frames: Sequence[DetectionFrame], filename: str = "detections.csv") -> Path:
        rows = []
        for frame in frames:
            if len(frame) == 0:
                rows.append({"time_index": frame.time_index})
            for z in frame.measurements:
                rows.append({"time_index": frame.time_index, "p_x_um": z[0], "p_y_um": z[1]})
        return self._write_csv(filename, DETECTION_COLUMNS, rows)

    def save_cardinality(self, records: Sequence[CardinalityRecord], filename: str = "cardinality.csv") -> Path:
        return self._write_csv(filename, CARDINALITY_COLUMNS, [r.model_dump() for r in records])

    def save_ospa(self, series, filename: str = "ospa.csv") -> Path:
        rows = [
            {"time_index": t, **result.model_dump()}
            for t, result in zip(series.time_indices, series.results)
        ]
        return self._write_csv(filename, OSPA_COLUMNS, rows)

    def save_accelerations(self, accelerations: pd.DataFrame, filename: str = "accelerations.csv") -> Path:
        return self._write_frame(filename, list(accelerations.columns), accelerations)

    def save_quantiles(self, quantiles: pd.DataFrame, filename: str = "normal_quantiles.csv") -> Path:
        return self._write_frame(filename, QUANTILE_COLUMNS, quantiles)

    def save_summary(self, name: str, summary: Dict[str, Any]) -> Path:
        """Write `<name>_summary.json`."""
        text = json.dumps(summary, indent=2, default=str)
        path = self._atomic_write(self.output_dir / f"{name}_summary.json", lambda f: f.write(text + "\n"))
        self.logger.info(f"Saved summary to {path}")
        return path

    # Readers

    @staticmethod
    def _read_csv(path, columns: List[str], optional: Sequence[str] = ()) -> pd.DataFrame:
        path = Path(path)
        if not path.exists():
            raise DataError(f"{path}: file not found")
        try:
            frame = pd.read_csv(path)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
            raise DataError(f"{path}: cannot parse CSV ({exc})") from exc

        missing = [c for c in columns if c not in frame.columns]
        unexpected = [c for c in frame.columns if c not in columns and c not in optional]
        if missing or unexpected:
            raise DataError(f"{path}: expected columns {columns}, missing {missing}, unexpected {unexpected}")
        return frame

    @staticmethod
    def _check_integral(path, frame: pd.DataFrame, columns: Sequence[str]) -> None:
        for column in columns:
            values = pd.to_numeric(frame[column], errors="coerce")
            if values.isna().any() or (values % 1 != 0).any():
                bad = frame.index[values.isna() | (values % 1 != 0)].tolist()[:5]
                raise DataError(f"{path}: column {column} must hold integers (rows {bad})")

    def load_points(self, path, with_weight: bool = True) -> List[TrackPoint]:
        """Read truth.csv or tracks.csv rows (weight defaults to 1 when absent)."""
        frame = self._read_csv(path, TRUTH_COLUMNS, optional=["weight"] if with_weight else ())
        self._check_integral(path, frame, ["track_id", "time_index"])
        numeric = frame[TRUTH_COLUMNS[2:]].apply(pd.to_numeric, errors="coerce")
        if numeric.isna().any().any():
            raise DataError(f"{path}: state columns must be numeric and non-empty")

        duplicated = frame.duplicated(["track_id", "time_index"])
        if duplicated.any():
            raise DataError(f"{path}: duplicate (track_id, time_index) rows {frame.index[duplicated].tolist()[:5]}")

        points = []
        for row in frame.itertuples(index=False):
            record = row._asdict()
            try:
                points.append(
                    TrackPoint(
                        track_id=int(record["track_id"]),
                        time_index=int(record["time_index"]),
                        p_x=float(record["p_x_um"]),
                        v_x=float(record["v_x_um_s"]),
                        p_y=float(record["p_y_um"]),
                        v_y=float(record["v_y_um_s"]),
                        weight=float(record.get("weight", 1.0)),
                    )
                )
            except ValueError as exc:
                raise DataError(f"{path}: invalid row {record}") from exc
        return points

    def load_truth(self, path) -> List[TrackPoint]:
        return self.load_points(path)

    def load_tracks(self, path) -> List[TrackPoint]:
        return self.load_points(path)

    def load_detections(self, path) -> List[DetectionFrame]:
        """
        Read detections.csv into frames in file order.

        A row with both coordinates empty marks a frame without detections. A
        time index that reappears after another one is reported as unsorted.
        """
        frame = self._read_csv(path, DETECTION_COLUMNS)
        self._check_integral(path, frame, ["time_index"])
        negative = pd.to_numeric(frame["time_index"]) < 0
        if negative.any():
            raise DataError(f"{path}: rows {frame.index[negative].tolist()[:5]} have a negative time index")

        raw_empty = frame[["p_x_um", "p_y_um"]].isna()
        coords = frame[["p_x_um", "p_y_um"]].apply(pd.to_numeric, errors="coerce")
        unparsed = (coords.isna() & ~raw_empty).any(axis=1)
        if unparsed.any():
            raise DataError(f"{path}: rows {frame.index[unparsed].tolist()[:5]} have non-numeric coordinates")
        half_empty = raw_empty.sum(axis=1) == 1
        if half_empty.any():
            raise DataError(f"{path}: rows {frame.index[half_empty].tolist()[:5]} have only one coordinate")

        frames, seen = [], set()
        current, measurements = None, []
        for t, x, y in zip(frame["time_index"].astype(int), coords["p_x_um"], coords["p_y_um"]):
            if t != current:
                if current is not None:
                    frames.append(DetectionFrame(current, np.array(measurements)))
                if t in seen:
                    raise DataError(f"{path}: detection frames are unsorted at time index {t}")
                seen.add(t)
                current, measurements = t, []
            if not math.isnan(x):
                measurements.append((x, y))
        if current is not None:
            frames.append(DetectionFrame(current, np.array(measurements)))
        return frames
