"""
Pydantic models for radio parameters and per-link channel state.

These records are shared by the simulation packages and double as sections of
the run configuration, so every field carries its unit in the description.
"""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator


LINK_TOLERANCE = 1e-6


class AntennaArrayConfig(BaseModel):
    """
    Base-station antenna: parabolic element pattern plus an (M, N, P) array.

    The baseline is the (8, 1, 2) array with 0.8 wavelength vertical element
    spacing and 6° electrical downtilt. Both polarizations carry the same
    power pattern, so P only changes the port count. A negative downtilt
    points the main lobe above the horizon ("sky cell").
    """

    m_rows: int = Field(default=8, ge=1, description="Rows in the array (M).")
    n_cols: int = Field(default=1, ge=1, description="Columns in the array (N).")
    polarizations: int = Field(default=2, ge=1, le=2, description="Polarizations (P).")
    vertical_spacing: float = Field(default=0.8, gt=0, description="Row spacing in wavelengths.")
    horizontal_spacing: float = Field(default=0.5, gt=0, description="Column spacing in wavelengths.")
    electrical_downtilt: float = Field(default=6.0, ge=-90, le=90, description="Degrees below horizon.")
    element_max_gain: float = Field(default=8.0, description="Element boresight gain in dBi.")
    element_hpbw_v: float = Field(default=65.0, gt=0, lt=180, description="Vertical HPBW in degrees.")
    element_hpbw_h: float = Field(default=65.0, gt=0, lt=180, description="Horizontal HPBW in degrees.")
    element_sla_v: float = Field(default=30.0, gt=0, description="Vertical side-lobe attenuation in dB.")
    element_fbr: float = Field(default=30.0, gt=0, description="Front-to-back ratio A_m in dB.")

    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def peak_gain(self) -> float:
        """Element gain plus coherent array gain of the steered main lobe."""
        return self.element_max_gain + 10.0 * math.log10(self.m_rows * self.n_cols)


class LinkState(BaseModel):
    """
    Large-scale state of one (cell, UE) link for one drop.

    coupling_gain is antenna gain plus path gain: antenna_gain - pathloss -
    shadowing, all in dB. Shadowing is stored as a loss, so a positive value
    weakens the link.
    """

    cell: int = Field(..., ge=0)
    ue: int = Field(..., ge=0)
    d2d: float = Field(..., ge=0, description="Wrapped horizontal distance in meters.")
    d3d: float = Field(..., ge=0, description="Slant distance in meters.")
    height_difference: float = Field(..., ge=0, description="|h_ut - h_bs| in meters.")
    los: bool = Field(..., description="Line-of-sight state frozen for the drop.")
    pathloss: float = Field(..., description="Pathloss in dB.")
    shadowing: float = Field(..., description="Shadow-fading loss in dB.")
    antenna_gain: float = Field(..., description="BS antenna gain towards the UE in dBi.")
    coupling_gain: float = Field(..., description="antenna_gain - pathloss - shadowing in dB.")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_geometry(self) -> "LinkState":
        if self.d3d + 1e-9 < self.d2d:
            raise ValueError("d3d must not be shorter than d2d")
        slant = math.hypot(self.d2d, self.height_difference)
        if not math.isclose(self.d3d, slant, rel_tol=LINK_TOLERANCE, abs_tol=LINK_TOLERANCE):
            raise ValueError(f"d3d {self.d3d} m does not match hypot(d2d, height_difference) = {slant} m")
        return self

    @model_validator(mode="after")
    def _check_coupling(self) -> "LinkState":
        expected = self.antenna_gain - self.pathloss - self.shadowing
        if not math.isclose(self.coupling_gain, expected, rel_tol=0.0, abs_tol=LINK_TOLERANCE):
            raise ValueError(f"coupling_gain {self.coupling_gain} dB differs from antenna_gain - pathloss - shadowing = {expected} dB")
        return self


class PowerControlConfig(BaseModel):
    """Open-loop fractional power control: P = min(p_max, p0 + 10 log10(n_rb) + alpha * PL)."""

    p0: float = Field(default=-90.0, description="Target received power per RB in dBm.")
    alpha: float = Field(default=1.0, ge=0.0, le=1.0, description="Pathloss compensation factor.")
    p_max: float = Field(default=23.0, description="UE maximum transmit power in dBm.")

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def _check_cap(self) -> "PowerControlConfig":
        if self.p_max < self.p0:
            raise ValueError("p_max must be at least p0")
        return self


class TrafficModel(BaseModel):
    """Poisson file arrivals per cell with a fixed file size (FTP-style)."""

    arrival_rate: float = Field(default=0.5, ge=0, description="Files per second per cell.")
    file_size: int = Field(default=500_000, gt=0, description="File size in bytes.")

    model_config = ConfigDict(frozen=True, extra="forbid")

    @property
    def offered_load_bps(self) -> float:
        return self.arrival_rate * self.file_size * 8.0

    @classmethod
    def from_offered_load(cls, offered_load_bps: float, file_size: int) -> "TrafficModel":
        return cls(arrival_rate=offered_load_bps / (8.0 * file_size), file_size=file_size)


class AerialClassifierConfig(BaseModel):
    """Received-power-pattern detector: aerial when >= k_cells lie within delta_db of the strongest."""

    delta_db: float = Field(default=6.0, gt=0)
    k_cells: int = Field(default=4, ge=2)

    model_config = ConfigDict(frozen=True, extra="forbid")


class HandoverConfig(BaseModel):
    """A3-event mobility parameters for the trajectory experiment."""

    hysteresis: float = Field(default=3.0, ge=0, description="A3 offset in dB; may be infinite.")
    time_to_trigger: float = Field(default=160.0, ge=0, description="Dwell time in ms.")
    ue_speed: float = Field(default=15.0, gt=0, description="Speed in m/s.")
    altitude: float = Field(default=120.0, gt=0, description="Flight altitude in meters.")
    measurement_period: float = Field(default=40.0, gt=0, description="Measurement period in ms.")
    ping_pong_window: float = Field(default=1000.0, ge=0, description="Return-to-cell window in ms.")

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="after")
    def _check_ttt(self) -> "HandoverConfig":
        ratio = self.time_to_trigger / self.measurement_period
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("time_to_trigger must be a multiple of measurement_period")
        return self
