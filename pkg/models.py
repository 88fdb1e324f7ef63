"""
Parameter and record models for the CPHD tracker
"""

import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class CVModelParams(BaseModel):
    """Constant-velocity model parameters (units: s, µm/s², µm)"""

    model_config = ConfigDict(frozen=True)

    delta_t: float = Field(default=1.0, gt=0, description="Sampling interval in seconds")
    sigma_x: float = Field(default=2.33, gt=0, description="Acceleration noise sd along x (µm/s²)")
    sigma_y: float = Field(default=2.33, gt=0, description="Acceleration noise sd along y (µm/s²)")
    sigma_o: float = Field(default=0.2, gt=0, description="Measurement noise sd (µm)")


class FilterConfig(BaseModel):
    """Mixture reduction and cardinality truncation settings"""

    model_config = ConfigDict(frozen=True)

    prune_T: float = Field(default=1e-5, ge=0, description="Pruning weight threshold")
    merge_U: float = Field(default=0.004, gt=0, description="Merging distance threshold")
    J_max: int = Field(default=200, ge=1, description="Maximum number of mixture components")
    N_card_max: int = Field(default=64, ge=1, description="Largest object count carried by the cardinality")


class OspaParams(BaseModel):
    """OSPA cutoff and order"""

    model_config = ConfigDict(frozen=True)

    cutoff_c: float = Field(default=30.0, gt=0)
    order_l: float = Field(default=1.0, ge=1)

    @property
    def is_infinite_order(self) -> bool:
        return math.isinf(self.order_l)


class OspaResult(BaseModel):
    """Total OSPA distance with its localization/cardinality split"""

    model_config = ConfigDict(frozen=True)

    total: float = Field(ge=0)
    localization: float = Field(ge=0)
    cardinality_err: float = Field(ge=0)


class TrackPoint(BaseModel):
    """One labeled state estimate (units: µm, µm/s)"""

    track_id: int = Field(ge=0)
    time_index: int = Field(ge=0)
    p_x: float
    v_x: float
    p_y: float
    v_y: float
    weight: float = Field(default=1.0, ge=0)


class AxisNormality(BaseModel):
    """Kolmogorov-Smirnov normality result for one acceleration axis"""

    axis: str
    samples: int = Field(ge=0)
    mean: float
    sd: float
    ks_statistic: Optional[float] = None
    p_value: Optional[float] = None
    decision: str = Field(description="accept, reject or skipped")
    note: str = ""

    @field_validator("decision")
    @classmethod
    def _known_decision(cls, value: str) -> str:
        if value not in {"accept", "reject", "skipped"}:
            raise ValueError("decision must be 'accept', 'reject' or 'skipped'")
        return value


class TrackingStats(BaseModel):
    """Statistics for one tracking run"""

    steps: int = 0
    measurements: int = 0
    max_components: int = 0
    extraction_shortfalls: int = 0
    consistency_checks: int = 0
    consistency_violations: int = 0

    @property
    def consistency_rate(self) -> float:
        """Fraction of post-update steps whose mass matched the expected count"""
        if self.consistency_checks == 0:
            return 1.0
        return 1.0 - self.consistency_violations / self.consistency_checks


class CardinalityRecord(BaseModel):
    """Per-step cardinality summary of the filter"""

    time_index: int = Field(ge=0)
    map_cardinality: int = Field(ge=0)
    expected_cardinality: float = Field(ge=0)
    intensity_mass: float = Field(ge=0)
    components: int = Field(ge=0)
