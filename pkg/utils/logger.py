"""
Logging utilities for the CPHD tracker
"""

import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional

from models import TrackingStats

CONSISTENCY_TOLERANCE = 0.5


def setup_logger(
    name: str,
    log_level: str = "INFO",
    log_file: Optional[str] = None,
    format_string: Optional[str] = None
) -> logging.Logger:
    """
    Set up a logger with console and optional file output
    """

    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, log_level.upper()))

    # one set of handlers per logger name
    logger.handlers.clear()

    if format_string is None:
        format_string = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    formatter = logging.Formatter(format_string)

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(getattr(logging, log_level.upper()))
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(log_path)
        file_handler.setLevel(getattr(logging, log_level.upper()))
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


class TrackLogger:
    """
    Logger wrapper for tracking runs with statistics tracking
    """

    def __init__(self, logger: logging.Logger):
        self.logger = logger
        self.start_time: Optional[datetime] = None
        self.stats = TrackingStats()

    def start_run(self, frames: int):
        """Start a new tracking run"""
        self.start_time = datetime.now()
        self.stats = TrackingStats()
        self.logger.info(f"Starting tracking run over {frames} frames")

    def log_step(
        self,
        time_index: int,
        measurements: int,
        components: int,
        intensity_mass: float,
        expected_cardinality: float,
    ):
        """Record one predict/update cycle and check mass/cardinality consistency"""
        stats = self.stats
        stats.steps += 1
        stats.measurements += measurements
        stats.max_components = max(stats.max_components, components)
        stats.consistency_checks += 1

        gap = abs(intensity_mass - expected_cardinality)
        if gap <= CONSISTENCY_TOLERANCE:
            self.logger.debug(
                f"Frame {time_index}: m={measurements}, J={components}, "
                f"mass={intensity_mass:.3f}, E[n]={expected_cardinality:.3f}"
            )
        else:
            stats.consistency_violations += 1
            self.logger.warning(
                f"Frame {time_index}: intensity mass {intensity_mass:.3f} differs from "
                f"expected count {expected_cardinality:.3f} by {gap:.3f}"
            )

    def log_shortfall(self, time_index: int, map_cardinality: int, components: int):
        """Log when the MAP count exceeds the available components"""
        self.stats.extraction_shortfalls += 1
        self.logger.warning(
            f"Frame {time_index}: MAP count {map_cardinality} exceeds {components} components"
        )

    def log_run_summary(self):
        """Log run summary statistics"""
        if self.start_time is None:
            return
        duration = datetime.now() - self.start_time
        stats = self.stats

        summary = f"""
Tracking Run Summary:
Duration: {duration}
Frames: {stats.steps}
Measurements: {stats.measurements}
Peak Components: {stats.max_components}
Extraction Shortfalls: {stats.extraction_shortfalls}
Consistency: {stats.consistency_rate * 100:.1f}% of {stats.consistency_checks} steps
            """
        self.logger.info(summary)

    def get_stats(self) -> TrackingStats:
        """Get a copy of the current run statistics"""
        return self.stats.model_copy()
