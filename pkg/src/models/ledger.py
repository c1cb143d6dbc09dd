"""
Model ledger: every channel and radio constant the simulator consumes.

The shipped values live in configs/model_ledger.toml and are copied into each
result directory so a run can be audited without reading code.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ModelLedger(BaseModel):
    """Auditable constants for the rural-macro channel, free space, noise and rate mapping."""

    speed_of_light: float = Field(default=3.0e8, gt=0, description="m/s, as used in the RMa breakpoint formula.")
    fspl_constant_db: float = Field(default=32.45, description="FSPL constant for d in m and f in GHz.")
    rma_building_height: float = Field(default=5.0, ge=5.0, le=50.0, description="Average building height h in m.")
    rma_street_width: float = Field(default=20.0, ge=5.0, le=50.0, description="Average street width W in m.")
    rma_los_near_distance: float = Field(default=10.0, ge=0, description="P_LOS = 1 up to this 2D distance (m).")
    rma_los_decay_length: float = Field(default=1000.0, gt=0, description="Exponential LOS decay length (m).")
    rma_max_ue_height: float = Field(default=23.0, gt=0, description="Highest UE height for the baseline LOS model (m).")
    aerial_los_anchor_height: float = Field(
        default=10.0, gt=0, description="Height where the aerial LOS interpolation leaves the ground model (m)."
    )
    los_cutoff_altitude: float = Field(default=100.0, gt=0, description="P_LOS = 1 at and above this altitude (m).")
    sigma_los_db: float = Field(default=4.0, ge=0, description="Shadowing std-dev for LOS links below BS height.")
    sigma_nlos_db: float = Field(default=8.0, ge=0, description="Shadowing std-dev for NLOS links below BS height.")
    shadowing_decorrelation: float = Field(default=50.0, gt=0, description="Decorrelation distance along paths (m).")
    pathloss_min_distance: float = Field(default=10.0, gt=0, description="Smallest supported d2d (m).")
    pathloss_max_distance: float = Field(default=30000.0, gt=0, description="Largest supported d2d (m).")
    min_frequency_ghz: float = Field(default=0.5, gt=0)
    max_frequency_ghz: float = Field(default=6.0, gt=0)
    thermal_noise_density: float = Field(default=-174.0, description="dBm/Hz.")
    rb_bandwidth: float = Field(default=180e3, gt=0, description="Resource-block bandwidth in Hz.")
    rate_efficiency: float = Field(default=0.6, gt=0, le=1, description="Attenuated-Shannon efficiency factor.")
    rate_cap: float = Field(default=4.4, gt=0, description="Spectral-efficiency cap in bit/s/Hz.")

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def _check_ranges(self) -> "ModelLedger":
        if self.los_cutoff_altitude <= self.aerial_los_anchor_height:
            raise ValueError("los_cutoff_altitude must exceed aerial_los_anchor_height")
        if self.pathloss_max_distance <= self.pathloss_min_distance:
            raise ValueError("pathloss_max_distance must exceed pathloss_min_distance")
        if self.max_frequency_ghz <= self.min_frequency_ghz:
            raise ValueError("max_frequency_ghz must exceed min_frequency_ghz")
        return self


DEFAULT_LEDGER = ModelLedger()
