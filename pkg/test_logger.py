#!/usr/bin/env python3
"""
Tests for run statistics logging
"""

import logging

import pytest

from utils.logger import TrackLogger, setup_logger


def test_consistency_counting(caplog):
    track_logger = TrackLogger(logging.getLogger("test_track_logger"))
    track_logger.start_run(3)
    with caplog.at_level(logging.DEBUG, logger="test_track_logger"):
        track_logger.log_step(0, measurements=4, components=10, intensity_mass=3.9, expected_cardinality=4.1)
        track_logger.log_step(1, measurements=4, components=25, intensity_mass=3.0, expected_cardinality=4.0)
        track_logger.log_shortfall(1, map_cardinality=5, components=4)

    stats = track_logger.get_stats()
    assert (stats.steps, stats.measurements, stats.max_components) == (2, 8, 25)
    assert stats.consistency_violations == 1
    assert stats.consistency_rate == pytest.approx(0.5)
    assert stats.extraction_shortfalls == 1
    warnings = [record for record in caplog.records if record.levelno == logging.WARNING]
    assert len(warnings) == 2


def test_stats_reset_per_run():
    track_logger = TrackLogger(logging.getLogger("test_track_logger"))
    track_logger.start_run(1)
    track_logger.log_step(0, 1, 1, 1.0, 1.0)
    track_logger.start_run(1)
    assert track_logger.get_stats().steps == 0
    assert track_logger.get_stats().consistency_rate == 1.0


def test_setup_logger_writes_file(tmp_path):
    log_file = tmp_path / "logs" / "run.log"
    logger = setup_logger("test_file_logger", "INFO", str(log_file))
    logger.info("hello")
    for handler in logger.handlers:
        handler.flush()
    assert "hello" in log_file.read_text()
    assert len(setup_logger("test_file_logger").handlers) == 1


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
