"""
Exception hierarchy for the CPHD tracker
"""


class TrackingError(Exception):
    """Base class for every error raised by the tracker"""

    exit_code = 1


class ConfigError(TrackingError):
    """Invalid configuration file or parameter record"""

    exit_code = 2


class CardinalitySupportError(ConfigError):
    """More measurements than the cardinality support can explain"""


class DataError(TrackingError):
    """Malformed input data (CSV files, frame sequences, vector dimensions)"""

    exit_code = 3


class NumericalError(TrackingError):
    """Numerical failure inside the filter (non-PD matrices, collapsed weights)"""

    exit_code = 4
