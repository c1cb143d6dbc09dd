"""
Run configuration schema.

A run configuration is a TOML document with one table per concern. Every
table is a strict pydantic model (unknown keys are rejected) whose defaults
mirror the rural LTE evaluation: 37 sites with 3 cells each, 10 MHz at
700 MHz, 46 dBm BS power, 6° downtilt at 35 m, an (8, 1, 2) array with
0.8 wavelength spacing, and 20% resource utilization.
"""

from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.models.radio import AntennaArrayConfig, PowerControlConfig


SUPPORTED_SITE_COUNTS = (1, 7, 19, 37)
GROUND_HEIGHT = 1.5


class Experiment(str, Enum):
    """Experiments the CLI can dispatch."""
    DL_CDF = "dl_cdf"
    UL_SWEEP = "ul_sweep"
    PC_SWEEP = "pc_sweep"
    PARTITION = "partition"
    LOS_CURVE = "los_curve"
    PATHLOSS_CURVES = "pathloss_curves"
    FRAGMENTATION = "fragmentation"
    HANDOVER = "handover"
    AERIAL_ID = "aerial_id"
    LAYOUT = "layout"
    ANTENNA_PATTERN = "antenna_pattern"


class LosModel(str, Enum):
    RMA_BASELINE = "rma_baseline"
    RMA_AERIAL = "rma_aerial"
    TERRAIN_EMPIRICAL = "terrain_empirical"


class InterferenceMode(str, Enum):
    AVERAGE = "average"
    BERNOULLI = "bernoulli"


class SchedulerKind(str, Enum):
    ROUND_ROBIN = "round_robin"
    PROPORTIONAL_FAIR = "proportional_fair"


class ShadowingMode(str, Enum):
    NONE = "none"
    IID = "iid"
    CORRELATED = "correlated"


class PowerControlTarget(str, Enum):
    AERIAL = "aerial"
    ALL = "all"


class HeightmapFormat(str, Enum):
    ASCII_GRID = "ascii_grid"
    FLAT_BINARY = "flat_binary"


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


def _positive_heights(values: List[float]) -> List[float]:
    if not values:
        raise ValueError("at least one altitude is required")
    if any(v <= 0 for v in values):
        raise ValueError("altitudes must be positive")
    return values


class ScenarioSection(_Section):
    name: str = Field(..., min_length=1, description="Scenario label written into metadata.")


class LayoutSection(_Section):
    n_sites: int = Field(default=37, description="1, 7, 19 or 37 sites.")
    inter_site_distance: float = Field(default=1732.0, gt=0, description="ISD in meters.")
    bs_height: float = Field(default=35.0, gt=0, description="BS antenna height in meters.")
    cells_per_site: int = Field(default=3, ge=3, le=3)
    azimuth_offset: float = Field(default=0.0, description="Bearing of sector 0 in degrees.")
    ues_per_cell: int = Field(default=10, ge=1)
    min_ue_distance: float = Field(default=10.0, ge=0, description="Minimum UE-site 2D distance in meters.")

    @field_validator("n_sites")
    @classmethod
    def _supported(cls, value: int) -> int:
        if value not in SUPPORTED_SITE_COUNTS:
            raise ValueError(f"n_sites must be one of {SUPPORTED_SITE_COUNTS}")
        return value


class ChannelSection(_Section):
    carrier_frequency: float = Field(default=0.7, description="Carrier frequency in GHz.")
    los_model: LosModel = Field(default=LosModel.RMA_AERIAL)
    los_curve_path: Optional[Path] = Field(default=None, description="CSV written by the los_curve experiment.")
    shadowing: bool = Field(default=True, description="Draw log-normal shadowing in campaigns.")


class RadioSection(_Section):
    bandwidth_mhz: float = Field(default=10.0, gt=0)
    n_rb: int = Field(default=50, ge=1)
    bs_tx_power: float = Field(default=46.0, description="BS transmit power in dBm.")
    ue_noise_figure: float = Field(default=9.0, ge=0, description="dB.")
    bs_noise_figure: float = Field(default=5.0, ge=0, description="dB.")


class DownlinkSection(_Section):
    altitudes: List[float] = Field(default_factory=lambda: [GROUND_HEIGHT, 40.0, 120.0])
    resource_utilization: float = Field(default=0.2, ge=0, le=1)
    interference_mode: InterferenceMode = Field(default=InterferenceMode.AVERAGE)
    sinr_floor: float = Field(default=-6.0, description="Release-12 coverage floor in dB.")
    ce_sinr_floor: float = Field(default=-10.0, description="Coverage-enhanced floor in dB.")
    c2_rate_floor: float = Field(default=100e3, gt=0, description="Command-and-control rate in bit/s.")
    data_rate_floor: float = Field(default=50e6, gt=0, description="Payload data rate in bit/s.")
    link_dump: bool = Field(default=True, description="Write the link CSV for the first seed.")

    @field_validator("altitudes")
    @classmethod
    def _check_heights(cls, value: List[float]) -> List[float]:
        return _positive_heights(value)


class UplinkSection(_Section):
    altitudes: List[float] = Field(default_factory=lambda: [GROUND_HEIGHT, 40.0, 120.0])
    aerial_ratio: float = Field(default=0.1, ge=0, le=1)
    offered_loads: List[float] = Field(
        default_factory=lambda: [0.5e6, 1.0e6, 2.0e6, 3.0e6, 4.0e6],
        description="Offered load per cell in bit/s.",
    )
    duration: float = Field(default=10.0, gt=0, description="Measured time after warm-up in s.")
    warmup: float = Field(default=1.0, ge=0, description="Warm-up in s.")
    tti: float = Field(default=1.0, gt=0, description="TTI length in ms.")
    scheduler: SchedulerKind = Field(default=SchedulerKind.ROUND_ROBIN)

    @field_validator("altitudes")
    @classmethod
    def _check_heights(cls, value: List[float]) -> List[float]:
        return _positive_heights(value)

    @field_validator("offered_loads")
    @classmethod
    def _loads(cls, value: List[float]) -> List[float]:
        if not value or any(v < 0 for v in value):
            raise ValueError("offered_loads must be a non-empty list of nonnegative rates")
        return value


class TrafficSection(_Section):
    file_size: int = Field(default=500_000, gt=0, description="Bytes per file.")


class EnhancementsSection(_Section):
    pc_p0_grid: List[float] = Field(default_factory=lambda: [-96.0, -93.0, -90.0])
    pc_alpha_grid: List[float] = Field(default_factory=lambda: [0.6, 0.8, 1.0])
    pc_target: PowerControlTarget = Field(default=PowerControlTarget.AERIAL)
    pc_offered_load: float = Field(default=2.0e6, ge=0)
    pc_altitude: float = Field(default=120.0, gt=0)
    partition_fractions: List[float] = Field(default_factory=lambda: [0.05, 0.1, 0.2, 0.3, 0.5])
    partition_offered_load: float = Field(default=2.0e6, ge=0)
    partition_altitude: float = Field(default=120.0, gt=0)
    classifier_delta_grid: List[float] = Field(default_factory=lambda: [2.0, 4.0, 6.0, 8.0, 10.0, 12.0])
    classifier_k_grid: List[int] = Field(default_factory=lambda: [2, 3, 4, 6, 8, 10])
    classifier_altitude: float = Field(default=120.0, gt=0)
    classifier_max_fpr: float = Field(default=0.1, ge=0, le=1)
    fragmentation_altitudes: List[float] = Field(default_factory=lambda: [GROUND_HEIGHT, 40.0, 120.0])
    fragmentation_raster_step: float = Field(default=50.0, gt=0)

    @field_validator("pc_p0_grid", "pc_alpha_grid", "partition_fractions", "classifier_delta_grid", "classifier_k_grid")
    @classmethod
    def _non_empty(cls, value: list) -> list:
        if not value:
            raise ValueError("grid must not be empty")
        return value

    @field_validator("partition_fractions")
    @classmethod
    def _open_unit(cls, value: List[float]) -> List[float]:
        if any(not 0.0 < f < 1.0 for f in value):
            raise ValueError("partition fractions must lie in (0, 1)")
        return value


class HandoverSection(_Section):
    hysteresis: float = Field(default=3.0, ge=0)
    time_to_trigger: float = Field(default=160.0, ge=0)
    ue_speed: float = Field(default=15.0, gt=0)
    measurement_period: float = Field(default=40.0, gt=0)
    ping_pong_window: float = Field(default=1000.0, ge=0)
    altitudes: List[float] = Field(default_factory=lambda: [GROUND_HEIGHT, 120.0])
    path_start: Tuple[float, float] = Field(default=(-5000.0, -300.0))
    path_end: Tuple[float, float] = Field(default=(5000.0, -300.0))
    shadowing_mode: ShadowingMode = Field(default=ShadowingMode.CORRELATED)

    @field_validator("altitudes")
    @classmethod
    def _check_heights(cls, value: List[float]) -> List[float]:
        return _positive_heights(value)


class TerrainSection(_Section):
    heightmap_path: Optional[Path] = Field(default=None)
    heightmap_format: HeightmapFormat = Field(default=HeightmapFormat.ASCII_GRID)
    n_bs_drops: int = Field(default=100, ge=1)
    bs_height_agl: float = Field(default=35.0, gt=0)
    ue_heights: List[float] = Field(default_factory=lambda: [GROUND_HEIGHT, 10.0, 30.0, 50.0, 100.0, 120.0])
    bin_min: float = Field(default=10.0, gt=0)
    bin_max: float = Field(default=35000.0, gt=0)
    n_bins: int = Field(default=46, ge=1)
    ues_per_bin: int = Field(default=20, ge=1)
    building_threshold: float = Field(default=2.0, ge=0, description="m above the local median.")
    median_window: int = Field(default=5, ge=1, description="Median filter window in cells.")

    @field_validator("ue_heights")
    @classmethod
    def _check_heights(cls, value: List[float]) -> List[float]:
        return _positive_heights(value)

    @model_validator(mode="after")
    def _bins(self) -> "TerrainSection":
        if self.bin_max <= self.bin_min:
            raise ValueError("bin_max must exceed bin_min")
        return self


class PathlossCurvesSection(_Section):
    """Geometry of the pathloss-curve comparison; independent of the campaign layout."""

    bs_height: float = Field(default=50.0, gt=0, description="BS antenna height in meters.")
    altitudes: List[float] = Field(default_factory=lambda: [30.0, 50.0], description="UE heights in meters.")
    carrier_frequency: float = Field(default=1.8, gt=0, description="Carrier frequency in GHz.")

    @field_validator("altitudes")
    @classmethod
    def _check_heights(cls, value: List[float]) -> List[float]:
        return _positive_heights(value)


class RunSection(_Section):
    seeds: List[int] = Field(..., min_length=1, description="Explicit seed list; never auto-randomized.")
    workers: int = Field(default=1, ge=1)
    ledger_path: Path = Field(default=Path("model_ledger.toml"), description="Relative to the configuration file.")
    output_dir: Path = Field(default=Path("results"))


class RunConfig(BaseModel):
    """Validated configuration of one simulator run."""

    scenario: ScenarioSection
    layout: LayoutSection = Field(default_factory=LayoutSection)
    antenna: AntennaArrayConfig = Field(default_factory=AntennaArrayConfig)
    channel: ChannelSection = Field(default_factory=ChannelSection)
    radio: RadioSection = Field(default_factory=RadioSection)
    downlink: DownlinkSection = Field(default_factory=DownlinkSection)
    uplink: UplinkSection = Field(default_factory=UplinkSection)
    power_control: PowerControlConfig = Field(default_factory=PowerControlConfig)
    aerial_power_control: Optional[PowerControlConfig] = Field(
        default=None, description="Separate setting for aerial UEs; None applies power_control to everyone."
    )
    traffic: TrafficSection = Field(default_factory=TrafficSection)
    enhancements: EnhancementsSection = Field(default_factory=EnhancementsSection)
    handover: HandoverSection = Field(default_factory=HandoverSection)
    terrain: TerrainSection = Field(default_factory=TerrainSection)
    pathloss_curves: PathlossCurvesSection = Field(default_factory=PathlossCurvesSection)
    run: RunSection

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def _check_channel(self) -> "RunConfig":
        if self.channel.los_model == LosModel.TERRAIN_EMPIRICAL and self.channel.los_curve_path is None:
            raise ValueError("channel.los_curve_path is required with los_model = terrain_empirical")
        if self.downlink.ce_sinr_floor > self.downlink.sinr_floor:
            raise ValueError("downlink.ce_sinr_floor must not exceed downlink.sinr_floor")
        return self

    def campaign_altitudes(self) -> List[Tuple[str, float]]:
        """Every (key, altitude) pair the configured experiments may evaluate."""
        pairs: List[Tuple[str, float]] = []
        pairs += [("downlink.altitudes", h) for h in self.downlink.altitudes]
        pairs += [("uplink.altitudes", h) for h in self.uplink.altitudes]
        pairs += [("handover.altitudes", h) for h in self.handover.altitudes]
        pairs += [("enhancements.fragmentation_altitudes", h) for h in self.enhancements.fragmentation_altitudes]
        pairs.append(("enhancements.pc_altitude", self.enhancements.pc_altitude))
        pairs.append(("enhancements.partition_altitude", self.enhancements.partition_altitude))
        pairs.append(("enhancements.classifier_altitude", self.enhancements.classifier_altitude))
        return pairs
