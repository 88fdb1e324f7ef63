#!/usr/bin/env python3
"""
Tests for CSV/JSON storage
"""

import json

import numpy as np
import pytest

from exceptions import DataError
from models import TrackPoint
from simulator import DetectionFrame, generate, standard_scenario
from utils.data_storage import DETECTION_COLUMNS, DataStorage, format_value


@pytest.fixture
def storage(tmp_path):
    return DataStorage(str(tmp_path))


def test_format_value():
    assert format_value(3) == "3"
    assert format_value(np.int64(7)) == "7"
    assert format_value(0.1 + 0.2) == "0.3"
    assert format_value(1.0 / 3.0) == "0.333333333"
    assert format_value(float("nan")) == ""
    assert format_value(None) == ""


def test_detections_keep_empty_frames(storage):
    frames = [
        DetectionFrame(0, [[1.0, 2.0], [3.0, 4.0]]),
        DetectionFrame(1, []),
        DetectionFrame(2, [[5.5, -6.25]]),
    ]
    path = storage.save_detections(frames)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(DETECTION_COLUMNS)
    assert "1,," in lines

    loaded = storage.load_detections(path)
    assert [frame.time_index for frame in loaded] == [0, 1, 2]
    assert len(loaded[1]) == 0
    np.testing.assert_array_equal(loaded[0].measurements, frames[0].measurements)
    np.testing.assert_array_equal(loaded[2].measurements, [[5.5, -6.25]])


def test_detections_all_empty(storage):
    path = storage.save_detections([DetectionFrame(t, []) for t in range(3)])
    loaded = storage.load_detections(path)
    assert [len(frame) for frame in loaded] == [0, 0, 0]


def test_unsorted_detections_rejected(storage, tmp_path):
    path = tmp_path / "unsorted.csv"
    path.write_text("time_index,p_x_um,p_y_um\n0,1,1\n1,2,2\n0,3,3\n")
    with pytest.raises(DataError, match="unsorted"):
        storage.load_detections(path)


def test_half_empty_detection_rejected(storage, tmp_path):
    path = tmp_path / "half.csv"
    path.write_text("time_index,p_x_um,p_y_um\n0,1,\n")
    with pytest.raises(DataError):
        storage.load_detections(path)


def test_non_numeric_detection_rejected(storage, tmp_path):
    path = tmp_path / "garbled.csv"
    path.write_text("time_index,p_x_um,p_y_um\n0,1.0,2.0\n1,abc,xyz\n2,3.0,4.0\n")
    with pytest.raises(DataError, match=r"\[1\] have non-numeric"):
        storage.load_detections(path)

    path.write_text("time_index,p_x_um,p_y_um\n0,1.0,2.0\n1,,xyz\n")
    with pytest.raises(DataError, match="non-numeric"):
        storage.load_detections(path)


def test_negative_detection_time_rejected(storage, tmp_path):
    path = tmp_path / "negative.csv"
    path.write_text("time_index,p_x_um,p_y_um\n-1,1.0,2.0\n0,3.0,4.0\n")
    with pytest.raises(DataError, match="negative"):
        storage.load_detections(path)


def test_bad_columns_and_values(storage, tmp_path):
    path = tmp_path / "tracks.csv"
    path.write_text("track_id,time_index,p_x_um,p_y_um\n0,0,1,1\n")
    with pytest.raises(DataError, match="missing"):
        storage.load_tracks(path)

    path.write_text("track_id,time_index,p_x_um,v_x_um_s,p_y_um,v_y_um_s\n0,0.5,1,0,1,0\n")
    with pytest.raises(DataError, match="integers"):
        storage.load_tracks(path)

    path.write_text("track_id,time_index,p_x_um,v_x_um_s,p_y_um,v_y_um_s\n0,0,1,0,1,0\n0,0,2,0,2,0\n")
    with pytest.raises(DataError, match="duplicate"):
        storage.load_tracks(path)

    with pytest.raises(DataError, match="not found"):
        storage.load_tracks(tmp_path / "absent.csv")


def test_save_load_save_is_identical(storage, tmp_path):
    truth, frames = generate(standard_scenario(seed=5))
    first = storage.save_truth(truth)
    points = storage.load_truth(first)
    second = DataStorage(str(tmp_path / "again")).save_tracks(points, filename="truth.csv")
    reloaded = storage.load_tracks(second)
    third = DataStorage(str(tmp_path / "third")).save_tracks(reloaded, filename="truth.csv")
    assert second.read_text() == third.read_text()

    detections = storage.save_detections(frames)
    again = DataStorage(str(tmp_path / "again")).save_detections(storage.load_detections(detections))
    assert detections.read_text() == again.read_text()


def test_no_temporary_files_left(storage, tmp_path):
    storage.save_tracks([TrackPoint(track_id=0, time_index=0, p_x=1, v_x=0, p_y=1, v_y=0)])
    storage.save_summary("evaluate", {"mean_total": 1.5})
    leftovers = [p.name for p in tmp_path.iterdir() if p.name.endswith(".tmp")]
    assert leftovers == []


def test_summary_json(storage):
    path = storage.save_summary("evaluate", {"cutoff_c": 30.0, "order_l": 1.0, "mean_total": 2.5})
    assert path.name == "evaluate_summary.json"
    assert json.loads(path.read_text())["cutoff_c"] == 30.0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
