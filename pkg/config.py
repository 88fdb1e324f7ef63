"""
Configuration management for the CPHD tracker
"""

import math
import os
from pathlib import Path
from typing import Literal, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from dynamics import (
    CORNER_BIRTH_COVARIANCE_SCALE,
    CORNER_BIRTH_WEIGHT,
    BirthModel,
    MeasurementModel,
    MotionModel,
    build_cv_motion,
    build_corner_birth_model,
    build_position_measurement,
)
from exceptions import ConfigError
from linking import default_gate
from models import CVModelParams, FilterConfig, OspaParams
from simulator import (
    DEFAULT_TRUTH_ACCEL_SD,
    MAX_ORGANELLE_SPEED,
    ScenarioSpec,
    empty_interval_scenario,
    standard_scenario,
    steady_scenario,
)

# Load environment variables from .env file
load_dotenv()

ENV_OVERRIDES = {
    "CPHD_LOG_LEVEL": "log_level",
    "CPHD_OUTPUT_DIRECTORY": "output_directory",
}


class RunConfig(BaseModel):
    """Configuration model for a tracking run."""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    # Motion and measurement models
    p_s: float = Field(default=0.99, ge=0, le=1, description="Survival probability")
    p_d: float = Field(default=0.98, ge=0, le=1, description="Detection probability")
    delta_t: float = Field(default=1.0, gt=0, description="Sampling interval in seconds")
    sigma_x: float = Field(default=2.33, gt=0, description="Filter acceleration noise sd along x (µm/s²)")
    sigma_y: float = Field(default=2.33, gt=0, description="Filter acceleration noise sd along y (µm/s²)")
    sigma_o: float = Field(default=0.2, gt=0, description="Measurement noise sd (µm)")

    # Mixture reduction
    prune_threshold: float = Field(default=1e-5, ge=0, description="Pruning weight threshold T")
    merge_threshold: float = Field(default=0.004, gt=0, description="Merging distance threshold U")
    max_components: int = Field(default=200, ge=1, description="Component cap J_max")
    max_cardinality: int = Field(default=64, ge=1, description="Cardinality truncation N_card_max")

    # Birth intensity
    birth_weight: float = Field(default=CORNER_BIRTH_WEIGHT, ge=0, description="Weight of each birth component")
    birth_covariance_scale: float = Field(
        default=CORNER_BIRTH_COVARIANCE_SCALE, gt=0, description="Birth covariance is this times the identity"
    )

    # Evaluation
    ospa_cutoff: float = Field(default=30.0, gt=0, description="OSPA cutoff c")
    ospa_order: float = Field(default=1.0, ge=1, description="OSPA order ℓ (.inf allowed)")
    link_gate: Optional[float] = Field(default=None, gt=0, description="Linking gate in µm; null derives it")
    significance_level: float = Field(default=0.05, gt=0, lt=1, description="KS test level α")

    # Synthetic scenario
    scenario: Literal["standard", "empty_interval", "steady"] = "standard"
    scenario_tracks: int = Field(default=16, ge=1, description="Track count of the steady scenario")
    scenario_duration: int = Field(default=100, ge=1, description="Duration of the steady scenario")
    scenario_accel_sd: float = Field(default=DEFAULT_TRUTH_ACCEL_SD, gt=0, description="Truth acceleration sd")
    scenario_accel_noise: Literal["gaussian", "uniform"] = "gaussian"
    scenario_max_speed: Optional[float] = Field(default=MAX_ORGANELLE_SPEED, gt=0, description="Truth speed cap")
    seed: int = Field(default=2013, ge=0, description="Scenario seed")

    # Output
    output_directory: str = Field(default="data", description="Directory for generated files")
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    log_file: Optional[str] = Field(default=None, description="Log file path")

    @classmethod
    def load(cls, config_path: str = "config.yaml") -> "RunConfig":
        """Load configuration from YAML file or create default."""
        config_file = Path(config_path)

        if not config_file.exists():
            default_config = cls.from_mapping({})
            default_config.save(config_path)
            return default_config

        with open(config_file, "r", encoding="utf-8") as file:
            try:
                config_data = yaml.safe_load(file) or {}
            except yaml.YAMLError as exc:
                mark = getattr(exc, "problem_mark", None)
                where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
                raise ConfigError(f"{config_path}: YAML syntax error{where}") from exc

        if not isinstance(config_data, dict):
            raise ConfigError(f"{config_path}: expected a mapping of keys to values")
        return cls.from_mapping(config_data, source=config_path)

    @classmethod
    def from_mapping(cls, config_data: dict, source: str = "config") -> "RunConfig":
        """Validate a mapping, applying environment overrides first."""
        config_data = dict(config_data)
        for variable, key in ENV_OVERRIDES.items():
            value = os.getenv(variable)
            if value:
                config_data[key] = value

        try:
            config = cls(**config_data)
        except ValidationError as exc:
            problems = "; ".join(
                f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}" for error in exc.errors()
            )
            raise ConfigError(f"{source}: invalid configuration ({problems})") from exc
        config.validate_config()
        return config

    def save(self, config_path: str = "config.yaml") -> None:
        """Save configuration to YAML file."""
        config_dict = self.model_dump()

        with open(config_path, "w", encoding="utf-8") as file:
            yaml.safe_dump(config_dict, file, default_flow_style=False, sort_keys=False)

    def override(self, **changes) -> "RunConfig":
        """Copy with the given keys replaced and revalidated; None values are ignored."""
        data = self.model_dump()
        data.update({key: value for key, value in changes.items() if value is not None})
        try:
            config = RunConfig(**data)
        except ValidationError as exc:
            raise ConfigError(f"invalid override: {exc.errors()[0]['msg']}") from exc
        config.validate_config()
        return config

    def validate_config(self) -> bool:
        """Validate cross-field settings."""
        if math.isnan(self.ospa_order):
            raise ConfigError("ospa_order must be a number in [1, inf]")

        if self.max_components < 4 and self.birth_weight > 0:
            raise ConfigError("max_components must hold at least the four birth components")

        if self.scenario == "steady" and self.scenario_tracks > self.max_cardinality:
            raise ConfigError("scenario_tracks exceeds max_cardinality")

        return True

    # Typed sub-configurations

    def cv_params(self) -> CVModelParams:
        return CVModelParams(
            delta_t=self.delta_t, sigma_x=self.sigma_x, sigma_y=self.sigma_y, sigma_o=self.sigma_o
        )

    def filter_config(self) -> FilterConfig:
        return FilterConfig(
            prune_T=self.prune_threshold,
            merge_U=self.merge_threshold,
            J_max=self.max_components,
            N_card_max=self.max_cardinality,
        )

    def ospa_params(self) -> OspaParams:
        return OspaParams(cutoff_c=self.ospa_cutoff, order_l=self.ospa_order)

    def motion_model(self) -> MotionModel:
        return build_cv_motion(self.cv_params(), self.p_s)

    def measurement_model(self) -> MeasurementModel:
        return build_position_measurement(self.cv_params(), self.p_d)

    def birth_model(self) -> BirthModel:
        return build_corner_birth_model(
            self.max_cardinality, weight=self.birth_weight, covariance_scale=self.birth_covariance_scale
        )

    def linking_gate(self) -> float:
        return self.link_gate if self.link_gate is not None else default_gate(self.cv_params())

    def scenario_spec(self) -> ScenarioSpec:
        common = dict(
            p_D=self.p_d,
            sigma_o=self.sigma_o,
            accel_sd=self.scenario_accel_sd,
            delta_t=self.delta_t,
            accel_noise=self.scenario_accel_noise,
            max_speed=self.scenario_max_speed,
        )
        if self.scenario == "empty_interval":
            return empty_interval_scenario(self.seed, **common)
        if self.scenario == "steady":
            return steady_scenario(self.scenario_tracks, self.scenario_duration, self.seed, **common)
        return standard_scenario(self.seed, **common)
