#!/usr/bin/env python3
"""
Tests for acceleration extraction and the normality test
"""

import logging

import numpy as np
import pytest

from analysis import (
    ZERO_VARIANCE_NOTE,
    analyze_accelerations,
    compute_accelerations,
    normal_quantiles,
    normality_test,
)
from models import TrackPoint
from simulator import generate, steady_scenario


def _points(track_id, times, xs, ys):
    return [
        TrackPoint(track_id=track_id, time_index=t, p_x=x, v_x=0.0, p_y=y, v_y=0.0)
        for t, x, y in zip(times, xs, ys)
    ]


def test_constant_velocity_gives_zero_acceleration():
    times = range(10)
    points = _points(0, times, [2.0 * t for t in times], [-1.0 * t + 3.0 for t in times])
    report = analyze_accelerations(points)

    assert report.samples == 8
    assert np.all(report.accelerations["a_x_um_s2"] == 0.0)
    for axis in ("x", "y"):
        result = report.axis(axis)
        assert result.decision == "skipped"
        assert result.note == ZERO_VARIANCE_NOTE
    assert ZERO_VARIANCE_NOTE in report.format_report()
    print("✓ Noiseless constant-velocity track reports the degenerate case")


def test_second_difference_values():
    points = _points(3, range(4), [0.0, 1.0, 4.0, 9.0], [0.0, 0.0, 0.0, 0.0])
    accelerations, excluded = compute_accelerations(points, delta_t=0.5)
    assert excluded == []
    np.testing.assert_allclose(accelerations["a_x_um_s2"], [8.0, 8.0])
    assert accelerations["time_index"].tolist() == [1, 2]
    assert accelerations["track_id"].tolist() == [3, 3]


def test_gaps_break_differencing():
    times = [0, 1, 2, 4, 5, 6]
    points = _points(0, times, [float(t) for t in times], [0.0] * 6)
    accelerations, _ = compute_accelerations(points)
    assert accelerations["time_index"].tolist() == [1, 5]


def test_short_tracks_are_excluded(caplog):
    points = _points(0, range(5), [0.0, 1.0, 3.0, 6.0, 10.0], [0.0] * 5) + _points(1, range(2), [0.0, 1.0], [0.0, 0.0])
    with caplog.at_level(logging.WARNING, logger="analysis"):
        report = analyze_accelerations(points)
    assert report.excluded_tracks == [1]
    assert report.samples == 3
    assert "Track 1" in caplog.text


def test_no_samples_at_all():
    report = analyze_accelerations(_points(0, range(2), [0.0, 1.0], [0.0, 0.0]))
    assert report.samples == 0
    assert all(result.decision == "skipped" for result in report.axes)
    assert report.quantiles.empty


def test_report_format():
    rng = np.random.default_rng(0)
    times = range(60)
    points = _points(0, times, np.cumsum(np.cumsum(rng.normal(size=60))), np.cumsum(np.cumsum(rng.normal(size=60))))
    report = analyze_accelerations(points)
    text = report.format_report()
    assert text.splitlines()[0] == "m=58"
    assert "µ_x^a=" in text and "σ_y^a=" in text
    assert "KS=" in text


def test_normality_test_rejects_skewed_sample():
    rng = np.random.default_rng(1)
    result = normality_test(rng.exponential(size=2000), "x")
    assert result.decision == "reject"
    assert result.p_value < 1e-6


def test_normal_quantiles_are_ordered():
    rng = np.random.default_rng(2)
    table = normal_quantiles(rng.normal(size=50), "y")
    assert len(table) == 50
    assert table["ordered_value"].is_monotonic_increasing
    assert table["theoretical_quantile"].is_monotonic_increasing
    assert set(table["axis"]) == {"y"}


def test_simulated_gaussian_accelerations_pass():
    accepted = 0
    for seed in range(100):
        truth, _ = generate(steady_scenario(4, 100, seed=seed, max_speed=None))
        report = analyze_accelerations(truth.records())
        accepted += report.axis("x").decision == "accept"
    assert accepted >= 90, f"H0 accepted in only {accepted} of 100 runs"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
